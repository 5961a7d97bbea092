#pragma once

// Experiment orchestration: JSON-configured end-to-end runs (sample, corrupt,
// truncate, recover, round, score), spectral verification sweeps, the
// determinant-identity suite, and calibration output. Records stream in seed
// order and are bit-reproducible for a fixed config.

#include "adversary.hpp"
#include "common.hpp"
#include "graphmat.hpp"
#include "metrics.hpp"
#include "model.hpp"
#include "robustpca.hpp"
#include "rounding.hpp"
#include "spectra.hpp"

#include "json.hpp"

#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

namespace bhrc {

using json = nlohmann::json;

struct AdversarySpec {
  std::string kind = "none";  // none | random | hub | monotone
  double delta = 0.0;         // budget = floor(delta * n)
};

struct ExperimentConfig {
  ModelParams model;
  int n = 0;
  std::vector<std::uint64_t> seeds;
  AdversarySpec adversary;
  std::map<std::string, double> overrides;
  double eps_star = 0.1;  // H count check runs at t* = 1/((1+eps_star) sqrt(d))
  bool allow_below_ks = false;
  std::string out_prefix;
  std::map<std::string, std::string> inputs;
  json raw;
};

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline ModelParams model_from_json(const json& j) {
  ModelParams mp;
  if (j.contains("model_file")) return load_model(j.at("model_file").get<std::string>());
  const json& m = j.contains("model") ? j.at("model") : j;
  mp.k = m.at("k").get<int>();
  mp.d = m.at("d").get<double>();
  auto piv = m.at("pi").get<std::vector<double>>();
  mp.pi = Eigen::Map<Vec>(piv.data(), long(piv.size()));
  auto rows = m.at("M").get<std::vector<std::vector<double>>>();
  check_config(int(rows.size()) == mp.k, "BadDimension", "M must have k rows");
  mp.M.resize(mp.k, mp.k);
  for (int i = 0; i < mp.k; ++i) {
    check_config(int(rows[i].size()) == mp.k, "BadDimension", "M must be k x k");
    for (int jj = 0; jj < mp.k; ++jj) mp.M(i, jj) = rows[i][jj];
  }
  validate_params(mp);
  return mp;
}

inline ExperimentConfig parse_config(const json& j) {
  ExperimentConfig cfg;
  cfg.raw = j;
  cfg.model = model_from_json(j);
  cfg.n = j.at("n").get<int>();
  check_config(cfg.n >= 1, "BadDimension", "n must be positive");
  if (j.contains("seeds")) {
    cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  }
  check_config(!cfg.seeds.empty(), "NoSeeds", "config must list at least one seed");
  if (j.contains("adversary")) {
    cfg.adversary.kind = j.at("adversary").value("kind", std::string("none"));
    cfg.adversary.delta = j.at("adversary").value("delta", 0.0);
    check_config(cfg.adversary.kind == "none" || cfg.adversary.kind == "random" ||
                     cfg.adversary.kind == "hub" || cfg.adversary.kind == "monotone",
                 "BadAdversary", "adversary kind must be none|random|hub|monotone");
    check_config(cfg.adversary.delta >= 0.0, "BadAdversary", "delta must be nonnegative");
  }
  if (j.contains("overrides")) {
    for (auto& [key, val] : j.at("overrides").items())
      cfg.overrides[key] = val.get<double>();
  }
  cfg.eps_star = j.value("eps_star", 0.1);
  cfg.allow_below_ks = j.value("allow_below_ks", false);
  if (j.contains("outputs")) cfg.out_prefix = j.at("outputs").value("prefix", std::string());
  if (j.contains("inputs")) {
    for (auto& [key, val] : j.at("inputs").items())
      cfg.inputs[key] = val.get<std::string>();
  }
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  check_config(bool(f), "MissingFile", "cannot open config " + path);
  json j = json::parse(f, nullptr, true, true);  // allow comments in fixtures
  return parse_config(j);
}

// Canonical hash: nlohmann::json orders object keys, so dump() is canonical.
inline std::uint64_t config_hash(const ExperimentConfig& cfg) {
  return fnv1a(cfg.raw.dump());
}

struct RunRecord {
  std::uint64_t seed = 0;
  std::uint64_t cfg_hash = 0;
  double rho = 0.0;
  double raw_inner = 0.0;
  double frob_w = 0.0;
  double frob_x = 0.0;
  double advantage = 0.0;
  double mi_per_vertex = 0.0;
  int phi_first = 0;
  int phi_final = 0;
  int trim_steps = 0;
  int dim_u = 0;
  double max_diag = 0.0;
  double c_over_sqrt_n = 0.0;
  double witness = 0.0;  // <y, Pi_U y> for the unit first true lift
  double wall_ms = 0.0;
  bool certified = true;
  std::string error;
};

inline std::string runrecord_csv_header() {
  return "# runrecord v1: seed,cfg_hash,rho,raw_inner,frob_w,frob_x,advantage,"
         "mi_per_vertex,phi_first,phi_final,trim_steps,dim_u,max_diag,"
         "c_over_sqrt_n,witness,wall_ms,certified,error";
}

inline std::string to_csv(const RunRecord& r) {
  char buf[640];
  std::snprintf(buf, sizeof(buf),
                "%" PRIu64 ",%" PRIu64
                ",%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%d,%d,%d,%.17g,%.17g,%.17g,"
                "%.1f,%d,%s",
                r.seed, r.cfg_hash, r.rho, r.raw_inner, r.frob_w, r.frob_x, r.advantage,
                r.mi_per_vertex, r.phi_first, r.phi_final, r.trim_steps, r.dim_u,
                r.max_diag, r.c_over_sqrt_n, r.witness, r.wall_ms, r.certified ? 1 : 0,
                r.error.c_str());
  return std::string(buf);
}

inline json to_json(const RunRecord& r) {
  return json{{"seed", r.seed},
              {"cfg_hash", r.cfg_hash},
              {"rho", r.rho},
              {"raw_inner", r.raw_inner},
              {"frob_w", r.frob_w},
              {"frob_x", r.frob_x},
              {"advantage", r.advantage},
              {"mi_per_vertex", r.mi_per_vertex},
              {"phi_first", r.phi_first},
              {"phi_final", r.phi_final},
              {"trim_steps", r.trim_steps},
              {"dim_u", r.dim_u},
              {"max_diag", r.max_diag},
              {"c_over_sqrt_n", r.c_over_sqrt_n},
              {"witness", r.witness},
              {"certified", r.certified},
              {"error", r.error}};
}

// Wall time is excluded: two runs of the same seed must hash identically.
inline std::uint64_t record_hash(const RunRecord& r) {
  RunRecord c = r;
  c.wall_ms = 0.0;
  return fnv1a(to_csv(c));
}

namespace detail {

inline std::pair<SparseGraph, CorruptionReport> apply_adversary(
    const SparseGraph& g, const Assignment& truth, const AdversarySpec& adv,
    std::uint64_t seed) {
  int budget = int(adv.delta * double(g.n));
  if (adv.kind == "none" || budget == 0) return {g, CorruptionReport{}};
  if (adv.kind == "random") return corrupt_random(g, budget, seed + 555);
  if (adv.kind == "hub") return corrupt_hub(g, budget, seed);
  if (adv.kind == "monotone") return corrupt_monotone(g, truth, budget, seed + 556);
  fail_config("BadAdversary", "unknown adversary kind " + adv.kind);
}

// Initial block for the filtered eigensearch: the low end of the truncated
// Bethe-Hessian pushed through the walk power, then orthonormalized.
inline Mat operator_seeds(const MOperator& op, std::uint64_t seed) {
  const int want = std::min(8, op.n());
  EigResult low = eig_extreme(op.H, -1, want,
                              std::numeric_limits<double>::infinity(), seed);
  Mat S = op.pw.apply(low.vectors);
  Eigen::HouseholderQR<Mat> qr(S);
  return qr.householderQ() * Mat::Identity(op.n(), int(S.cols()));
}

}  // namespace detail

// One pipeline seed end to end. Invariant violations and algorithm errors are
// captured in the record; config errors propagate.
inline RunRecord run_one_seed(const ExperimentConfig& cfg, const TransitionSpec& ts,
                              const AlgoParams& ap, std::uint64_t seed) {
  RunRecord rec;
  rec.seed = seed;
  rec.cfg_hash = config_hash(cfg);
  auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                     t0)
        .count();
  };

  try {
    auto [truth, g_clean] = sample_sbm(cfg.model, cfg.n, seed);
    auto [g, report] = detail::apply_adversary(g_clean, truth, cfg.adversary, seed);
    TruncationResult tr = truncate(g, ap.B);

    RecoveredSubspace rs;
    if (cfg.n <= kDenseCutoff) {
      SpMat Mtilde = m_matrix(tr, ap.ell, ap.t);
      rs = recover_subspace(Mtilde, ap.r, ap, seed + 31337);
    } else {
      MOperator op(tr, ap.t, ap.ell);
      Rng trng(seed + 31337);
      Mat seeds = detail::operator_seeds(op, seed + 31338);
      double b = 1.3 * lanczos_lambda_max(op, trng) + 1.0;
      rs = recover_subspace_operator(op, seeds, ap.r, ap, b, trng);
    }
    rec.phi_first = rs.trim.phi_history.empty() ? 0 : rs.trim.phi_history.front();
    rec.phi_final = rs.trim.phi_history.empty() ? 0 : rs.trim.phi_history.back();
    rec.trim_steps = rs.trim.step;
    rec.dim_u = int(rs.U.cols());
    rec.max_diag = rs.diag_bound_witness;
    rec.certified = rs.certified;

    Vec y = lift_vector(ts.Psi.col(0), truth);
    y /= y.norm();
    rec.witness = (rs.U.transpose() * y).squaredNorm();

    RoundResult rr = round_subspace(rs.U, ts, cfg.model.pi, seed + 999);
    rec.c_over_sqrt_n = rr.weights.c / std::sqrt(double(cfg.n));

    // score against the exact rounding expectation W, not the one sampled
    // assignment: rho is defined for E of the rounded labels
    RecoveryScore rep = weak_recovery_corr(rr.weights.W, truth, ts);
    rec.rho = rep.rho;
    rec.raw_inner = rep.raw_inner;
    rec.frob_w = rep.frob_w;
    rec.frob_x = rep.frob_x;
    rec.advantage = partition_advantage(majority_set(rr.xhat), truth);
    rec.mi_per_vertex = mutual_information(rr.xhat, truth) / double(cfg.n);
  } catch (const error& e) {
    if (e.config) throw;
    rec.error = e.code;  // EmptySubspace lands here: uniform prior, rho stays 0
  } catch (const std::exception& e) {
    rec.error = e.what();
  }
  rec.wall_ms = elapsed();
  return rec;
}

inline std::vector<RunRecord> run_pipeline(
    const ExperimentConfig& cfg,
    const std::function<void(const RunRecord&)>& emit = {}) {
  TransitionSpec ts = analyze_transition(cfg.model);
  if (ks_signal(cfg.model) <= 0.0 && !cfg.allow_below_ks)
    fail_config("BelowKestenStigum",
                "lambda2^2 d <= 1; pass --allow-below-ks to run anyway");
  AlgoParams ap = select_parameters(cfg.model, cfg.overrides);

  // Seeds are independent pipelines; with more workers they would fan out
  // here. Records are emitted in seed order either way.
  std::vector<RunRecord> out;
  out.reserve(cfg.seeds.size());
  for (std::uint64_t s : cfg.seeds) {
    out.push_back(run_one_seed(cfg, ts, ap, s));
    if (emit) emit(out.back());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Spectral verification sweeps.

struct SpectraSeedReport {
  std::uint64_t seed = 0;
  int count_h = 0;      // negatives of H(t*) on the working graph
  int count_m = 0;      // negatives of the untruncated walk sandwich
  int count_mbar = 0;   // negatives of the truncated walk sandwich
  bool h_ok = false;
  bool mbar_ok = false;
  double qform_per_n = 0.0;  // worst true-lift quadratic form over n
  bool qform_ok = false;
  int below_ks_negatives = 0;  // below-KS mode: total count over the t grid
  std::string error;
};

struct SpectraReport {
  bool below_ks_mode = false;
  std::vector<SpectraSeedReport> seeds;
  double h_pass_rate = 0.0;
  double mbar_pass_rate = 0.0;
  double qform_pass_rate = 0.0;
  double below_ks_zero_rate = 0.0;
  double mean_qform_per_n = 0.0;
  double eval_p_prediction = 0.0;  // p(lambda2) scaled like the measured form
  double eval_p_ratio = 0.0;       // measured / predicted, reported not asserted
};

inline SpectraReport verify_spectra(const ExperimentConfig& cfg) {
  check_config(cfg.n <= 20000, "TooLarge", "spectral verification runs at n <= 20000");
  TransitionSpec ts = analyze_transition(cfg.model);
  SpectraReport rep;
  rep.below_ks_mode = ks_signal(cfg.model) <= 0.0;

  if (rep.below_ks_mode) {
    int zero_seeds = 0;
    for (std::uint64_t s : cfg.seeds) {
      SpectraSeedReport sr;
      sr.seed = s;
      auto [truth, g] = sample_sbm(cfg.model, cfg.n, s);
      (void)truth;
      for (int j = 1; j <= 9; ++j) {
        double t = 0.1 * double(j) / cfg.model.d;
        sr.below_ks_negatives += count_below(bethe_hessian(g, t), -1e-8);
      }
      if (sr.below_ks_negatives == 0) zero_seeds += 1;
      rep.seeds.push_back(std::move(sr));
    }
    rep.below_ks_zero_rate = double(zero_seeds) / double(cfg.seeds.size());
    return rep;
  }

  AlgoParams ap = select_parameters(cfg.model, cfg.overrides);
  const double tstar = 1.0 / ((1.0 + cfg.eps_star) * std::sqrt(cfg.model.d));
  int h_pass = 0, mbar_pass = 0, q_pass = 0;
  double qsum = 0.0;
  int qcnt = 0;

  for (std::uint64_t s : cfg.seeds) {
    SpectraSeedReport sr;
    sr.seed = s;
    try {
      auto [truth, g_clean] = sample_sbm(cfg.model, cfg.n, s);
      auto [g, report] = detail::apply_adversary(g_clean, truth, cfg.adversary, s);

      sr.count_h = count_below(bethe_hessian(g, tstar), -1e-8);
      sr.h_ok = sr.count_h >= cfg.model.k - 1 && sr.count_h <= cfg.model.k;

      TruncationResult tr = truncate(g, ap.B);
      {
        MOperator op(tr, ap.t, ap.ell);
        Rng rng(s + 101);
        Mat seeds = detail::operator_seeds(op, s + 102);
        double b = 1.3 * lanczos_lambda_max(op, rng) + 1.0;
        sr.count_mbar = find_below(op, -ap.eta, seeds, b, rng).count;

        for (int a = 0; a < ap.r; ++a) {
          Vec y = lift_vector(ts.Psi.col(a), truth);
          double q = y.dot(op.apply(y)) / double(cfg.n);
          sr.qform_per_n = a == 0 ? q : std::max(sr.qform_per_n, q);
        }
        sr.qform_ok = sr.qform_per_n <= -ap.upsilon;
      }
      {
        // untruncated variant: same sandwich over the raw graph
        TruncationResult raw;
        raw.graph = g;
        raw.dbar = Vec::Zero(g.n);
        for (int i = 0; i < g.n; ++i) raw.dbar[i] = double(g.deg[i]);
        MOperator op(raw, ap.t, ap.ell);
        Rng rng(s + 103);
        Mat seeds = detail::operator_seeds(op, s + 104);
        double b = 1.3 * lanczos_lambda_max(op, rng) + 1.0;
        sr.count_m = find_below(op, -ap.eta, seeds, b, rng).count;
      }

      h_pass += sr.h_ok ? 1 : 0;
      mbar_pass += sr.mbar_ok = (sr.count_mbar >= ap.r && sr.count_mbar <= ap.r + 1);
      q_pass += sr.qform_ok ? 1 : 0;
      qsum += sr.qform_per_n;
      qcnt += 1;
    } catch (const error& e) {
      if (e.config) throw;
      sr.error = e.code;
    } catch (const std::exception& e) {
      sr.error = e.what();
    }
    rep.seeds.push_back(std::move(sr));
  }

  const double ns = double(cfg.seeds.size());
  rep.h_pass_rate = double(h_pass) / ns;
  rep.mbar_pass_rate = double(mbar_pass) / ns;
  rep.qform_pass_rate = double(q_pass) / ns;
  rep.mean_qform_per_n = qcnt ? qsum / double(qcnt) : 0.0;
  // The lift carries ||y||^2 ~ n, so the prediction is p(lambda2) itself; the
  // measured forms run far past it and the ratio is informational only.
  rep.eval_p_prediction = ap.p_value;
  rep.eval_p_ratio = rep.eval_p_prediction != 0.0
                         ? rep.mean_qform_per_n / rep.eval_p_prediction
                         : 0.0;
  return rep;
}

inline json to_json(const SpectraReport& r) {
  json seeds = json::array();
  for (const auto& s : r.seeds) {
    seeds.push_back(json{{"seed", s.seed},
                         {"count_h", s.count_h},
                         {"count_m", s.count_m},
                         {"count_mbar", s.count_mbar},
                         {"h_ok", s.h_ok},
                         {"mbar_ok", s.mbar_ok},
                         {"qform_per_n", s.qform_per_n},
                         {"qform_ok", s.qform_ok},
                         {"below_ks_negatives", s.below_ks_negatives},
                         {"error", s.error}});
  }
  return json{{"below_ks_mode", r.below_ks_mode},
              {"h_pass_rate", r.h_pass_rate},
              {"mbar_pass_rate", r.mbar_pass_rate},
              {"qform_pass_rate", r.qform_pass_rate},
              {"below_ks_zero_rate", r.below_ks_zero_rate},
              {"mean_qform_per_n", r.mean_qform_per_n},
              {"eval_p_prediction", r.eval_p_prediction},
              {"eval_p_ratio", r.eval_p_ratio},
              {"seeds", seeds}};
}

// ---------------------------------------------------------------------------
// Determinant identity sweep: random graphs, trees, and the triangle.

struct IharaBassReport {
  int graphs = 0;
  double max_residual = 0.0;
  double max_tree_residual = 0.0;
  double triangle_residual = 0.0;
};

namespace detail {

inline SparseGraph random_graph(int n, double p, Rng& rng, int edge_cap = 200) {
  std::vector<std::pair<int, int>> edges;
  for (int u = 0; u < n && int(edges.size()) < edge_cap; ++u) {
    for (int v = u + 1; v < n && int(edges.size()) < edge_cap; ++v) {
      if (rng.u01() < p) edges.push_back({u, v});
    }
  }
  return make_graph(n, edges);
}

inline SparseGraph random_tree(int n, Rng& rng) {
  std::vector<std::pair<int, int>> edges;
  for (int v = 1; v < n; ++v) edges.push_back({rng.index(v), v});
  return make_graph(n, edges);
}

}  // namespace detail

inline double ihara_bass_grid_residual(const SparseGraph& g) {
  double worst = 0.0;
  for (int j = 1; j <= 9; ++j) {
    for (double sgn : {1.0, -1.0}) {
      worst = std::max(worst, ihara_bass_residual(g, sgn * 0.1 * double(j)));
    }
  }
  return worst;
}

inline IharaBassReport verify_ihara_bass(std::uint64_t seed, int graphs = 200) {
  Rng rng(seed);
  IharaBassReport rep;
  const double probs[] = {0.08, 0.15, 0.30, 0.60};
  for (int i = 0; i < graphs; ++i) {
    int n = 2 + rng.index(39);
    SparseGraph g = detail::random_graph(n, probs[i % 4], rng);
    rep.max_residual = std::max(rep.max_residual, ihara_bass_grid_residual(g));
    rep.graphs += 1;
  }
  for (int i = 0; i < 20; ++i) {
    SparseGraph tr = detail::random_tree(2 + rng.index(39), rng);
    rep.max_tree_residual = std::max(rep.max_tree_residual, ihara_bass_grid_residual(tr));
  }
  SparseGraph k3 = make_graph(3, {{0, 1}, {0, 2}, {1, 2}});
  rep.triangle_residual = ihara_bass_grid_residual(k3);
  rep.max_residual = std::max(rep.max_residual, rep.triangle_residual);
  return rep;
}

inline json to_json(const IharaBassReport& r) {
  return json{{"graphs", r.graphs},
              {"max_residual", r.max_residual},
              {"max_tree_residual", r.max_tree_residual},
              {"triangle_residual", r.triangle_residual}};
}

// ---------------------------------------------------------------------------
// Calibration: run the clean pipeline and freeze thresholds with margin.

inline json calibrate(ExperimentConfig cfg) {
  cfg.adversary = AdversarySpec{};
  std::vector<RunRecord> recs = run_pipeline(cfg);
  double mean_rho = 0.0;
  int ok = 0;
  for (const auto& r : recs) {
    if (r.error.empty()) {
      mean_rho += r.rho;
      ok += 1;
    }
  }
  check_invariant(ok > 0, "CalibrationFailed", "every calibration seed errored");
  mean_rho /= double(ok);

  json out;
  out["_schema"] = "calibration v1";
  out["_provenance"] =
      "clean-run calibration; rho_clean is 0.75x the measured clean mean so the "
      "regression gate tolerates seed-level variance";
  out["model"] = {{"k", cfg.model.k},
                  {"d", cfg.model.d},
                  {"lambda2", analyze_transition(cfg.model).lambda2}};
  out["n"] = cfg.n;
  out["seeds_used"] = cfg.seeds;
  out["mean_rho_measured"] = mean_rho;
  out["rho_clean"] = 0.75 * mean_rho;
  out["eps_star"] = cfg.eps_star;
  if (cfg.overrides.count("Kcap")) out["kcap_override"] = cfg.overrides.at("Kcap");
  out["delta_workable"] = 0.002;
  return out;
}

}  // namespace bhrc
