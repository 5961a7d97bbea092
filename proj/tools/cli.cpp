// Command-line front end: sampling, corruption, recovery, scoring, spectral
// verification sweeps, the determinant-identity suite, full pipeline runs,
// and calibration. Exit codes: 0 ok, 2 config error, 3 invariant violation.

#include "bhrc/harness.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>

namespace {

using bhrc::Assignment;
using bhrc::ExperimentConfig;
using bhrc::json;

std::vector<std::uint64_t> parse_seed_range(const std::string& s) {
  auto pos = s.find("..");
  bhrc::check_config(pos != std::string::npos, "BadSeedRange",
                     "--seeds expects the form A..B");
  std::uint64_t a = std::stoull(s.substr(0, pos));
  std::uint64_t b = std::stoull(s.substr(pos + 2));
  bhrc::check_config(a <= b, "BadSeedRange", "--seeds range must be ascending");
  std::vector<std::uint64_t> out;
  for (std::uint64_t v = a; v <= b; ++v) out.push_back(v);
  return out;
}

void write_labels(const std::string& path, const Assignment& a) {
  std::ofstream f(path);
  bhrc::check_config(bool(f), "MissingFile", "cannot write " + path);
  f << a.n() << " " << a.k << "\n";
  for (int x : a.labels) f << x << "\n";
}

Assignment read_labels(const std::string& path) {
  std::ifstream f(path);
  bhrc::check_config(bool(f), "MissingFile", "cannot open labels " + path);
  int n = 0;
  Assignment a;
  f >> n >> a.k;
  bhrc::check_config(n >= 0 && a.k >= 1, "ParseError", "bad labels header in " + path);
  a.labels.resize(n);
  for (int i = 0; i < n; ++i) {
    bhrc::check_config(bool(f >> a.labels[i]), "ParseError", "truncated labels " + path);
    bhrc::check_config(a.labels[i] >= 0 && a.labels[i] < a.k, "ParseError",
                       "label out of range in " + path);
  }
  return a;
}

std::string need_input(const ExperimentConfig& cfg, const std::string& key) {
  auto it = cfg.inputs.find(key);
  bhrc::check_config(it != cfg.inputs.end(), "MissingInput",
                     "config inputs." + key + " is required for this command");
  return it->second;
}

void emit_text(const std::string& out_path, const std::string& text) {
  if (out_path.empty()) {
    std::cout << text << "\n";
    return;
  }
  std::ofstream f(out_path);
  bhrc::check_config(bool(f), "MissingFile", "cannot write " + out_path);
  f << text << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"robust spectral community recovery toolkit"};
  app.require_subcommand(1);

  std::string config_path, out_path, format = "csv", seeds_range;
  std::uint64_t seed_flag = 0;
  bool seed_given = false, allow_below_ks = false;

  app.add_option("--config", config_path, "experiment config JSON");
  app.add_option("--out", out_path, "output path (stdout when omitted)");
  app.add_option("--format", format, "csv|json")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--seed", seed_flag, "single seed override")
      ->each([&](const std::string&) { seed_given = true; });
  app.add_option("--seeds", seeds_range, "seed range A..B override");
  app.add_flag("--allow-below-ks", allow_below_ks, "run models at or below the threshold");

  auto* c_sample = app.add_subcommand("sample", "draw a block-model graph and labels");
  auto* c_corrupt = app.add_subcommand("corrupt", "apply the configured adversary");
  auto* c_recover = app.add_subcommand("recover", "recover labels from a graph file");
  auto* c_evaluate = app.add_subcommand("evaluate", "score an estimated assignment");
  auto* c_spectra = app.add_subcommand("spectra", "negative-eigenvalue verification");
  auto* c_ihara = app.add_subcommand("ihara-bass", "determinant identity sweep");
  auto* c_pipeline = app.add_subcommand("pipeline", "full end-to-end runs");
  auto* c_calibrate = app.add_subcommand("calibrate", "freeze clean-run thresholds");
  for (auto* sub : {c_sample, c_corrupt, c_recover, c_evaluate, c_spectra, c_ihara,
                    c_pipeline, c_calibrate})
    sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    ExperimentConfig cfg;
    if (!config_path.empty()) cfg = bhrc::load_config(config_path);
    if (seed_given) cfg.seeds = {seed_flag};
    if (!seeds_range.empty()) cfg.seeds = parse_seed_range(seeds_range);
    if (allow_below_ks) cfg.allow_below_ks = true;
    std::string prefix = !out_path.empty() ? out_path
                         : !cfg.out_prefix.empty() ? cfg.out_prefix
                                                   : std::string("run");

    if (*c_sample) {
      bhrc::check_config(!config_path.empty(), "MissingConfig", "sample needs --config");
      bhrc::check_config(!cfg.seeds.empty(), "NoSeeds", "sample needs a seed");
      auto [truth, g] = bhrc::sample_sbm(cfg.model, cfg.n, cfg.seeds.front());
      bhrc::save_graph(g, prefix + ".graph");
      write_labels(prefix + ".labels", truth);
      std::cout << "wrote " << prefix << ".graph (" << g.edges.size() << " edges), "
                << prefix << ".labels\n";
    } else if (*c_corrupt) {
      bhrc::check_config(!config_path.empty(), "MissingConfig", "corrupt needs --config");
      bhrc::SparseGraph g = bhrc::load_graph(need_input(cfg, "graph"));
      Assignment truth;
      if (cfg.adversary.kind == "monotone") truth = read_labels(need_input(cfg, "labels"));
      auto [g2, rep] = bhrc::detail::apply_adversary(
          g, truth, cfg.adversary, cfg.seeds.empty() ? 1 : cfg.seeds.front());
      bhrc::save_graph(g2, prefix + ".graph");
      std::ofstream ef(prefix + ".edits");
      rep.write(ef);
      std::cout << "wrote " << prefix << ".graph, " << prefix << ".edits ("
                << rep.edits.size() << " edits)\n";
    } else if (*c_recover) {
      bhrc::check_config(!config_path.empty(), "MissingConfig", "recover needs --config");
      bhrc::SparseGraph g = bhrc::load_graph(need_input(cfg, "graph"));
      bhrc::TransitionSpec ts = bhrc::analyze_transition(cfg.model);
      if (bhrc::ks_signal(cfg.model) <= 0.0 && !cfg.allow_below_ks)
        bhrc::fail_config("BelowKestenStigum", "model signal at or below threshold");
      bhrc::AlgoParams ap = bhrc::select_parameters(cfg.model, cfg.overrides);
      std::uint64_t seed = cfg.seeds.empty() ? 1 : cfg.seeds.front();
      bhrc::TruncationResult tr = bhrc::truncate(g, ap.B);
      bhrc::RecoveredSubspace rs;
      if (g.n <= bhrc::kDenseCutoff) {
        rs = bhrc::recover_subspace(bhrc::m_matrix(tr, ap.ell, ap.t), ap.r, ap,
                                    seed + 31337);
      } else {
        bhrc::MOperator op(tr, ap.t, ap.ell);
        bhrc::Rng rng(seed + 31337);
        bhrc::Mat seeds = bhrc::detail::operator_seeds(op, seed + 31338);
        double b = 1.3 * bhrc::lanczos_lambda_max(op, rng) + 1.0;
        rs = bhrc::recover_subspace_operator(op, seeds, ap.r, ap, b, rng);
      }
      bhrc::RoundResult rr = bhrc::round_subspace(rs.U, ts, cfg.model.pi, seed + 999);
      write_labels(prefix + ".xhat", rr.xhat);
      json summary{{"dim_u", rs.U.cols()},
                   {"max_diag", rs.diag_bound_witness},
                   {"trim_steps", rs.trim.step},
                   {"phi_history", rs.trim.phi_history},
                   {"c_over_sqrt_n", rr.weights.c / std::sqrt(double(g.n))},
                   {"certified", rs.certified}};
      emit_text(prefix + ".summary.json", summary.dump(2));
      std::cout << "wrote " << prefix << ".xhat, " << prefix << ".summary.json\n";
    } else if (*c_evaluate) {
      bhrc::check_config(!config_path.empty(), "MissingConfig", "evaluate needs --config");
      Assignment truth = read_labels(need_input(cfg, "labels"));
      Assignment xhat = read_labels(need_input(cfg, "xhat"));
      bhrc::TransitionSpec ts = bhrc::analyze_transition(cfg.model);
      bhrc::RecoveryScore rep = bhrc::weak_recovery_corr(xhat.one_hot(), truth, ts);
      json out{{"rho", rep.rho},
               {"raw_inner", rep.raw_inner},
               {"frob_w", rep.frob_w},
               {"frob_x", rep.frob_x},
               {"advantage",
                bhrc::partition_advantage(bhrc::majority_set(xhat), truth)},
               {"mi_per_vertex", bhrc::mutual_information(xhat, truth) / truth.n()}};
      emit_text(out_path, out.dump(2));
    } else if (*c_spectra) {
      bhrc::check_config(!config_path.empty(), "MissingConfig", "spectra needs --config");
      bhrc::SpectraReport rep = bhrc::verify_spectra(cfg);
      emit_text(out_path, bhrc::to_json(rep).dump(2));
    } else if (*c_ihara) {
      std::uint64_t seed = cfg.seeds.empty() ? 1 : cfg.seeds.front();
      bhrc::IharaBassReport rep = bhrc::verify_ihara_bass(seed);
      emit_text(out_path, bhrc::to_json(rep).dump(2));
    } else if (*c_pipeline) {
      bhrc::check_config(!config_path.empty(), "MissingConfig", "pipeline needs --config");
      std::ofstream file;
      std::ostream* os = &std::cout;
      if (!out_path.empty()) {
        file.open(out_path);
        bhrc::check_config(bool(file), "MissingFile", "cannot write " + out_path);
        os = &file;
      }
      if (format == "csv") {
        *os << bhrc::runrecord_csv_header() << "\n";
        bhrc::run_pipeline(cfg, [&](const bhrc::RunRecord& r) {
          *os << bhrc::to_csv(r) << "\n";
          os->flush();
        });
      } else {
        json arr = json::array();
        bhrc::run_pipeline(cfg,
                           [&](const bhrc::RunRecord& r) { arr.push_back(to_json(r)); });
        *os << arr.dump(2) << "\n";
      }
    } else if (*c_calibrate) {
      bhrc::check_config(!config_path.empty(), "MissingConfig", "calibrate needs --config");
      json out = bhrc::calibrate(cfg);
      emit_text(out_path.empty() ? std::string("fixtures/calibration.json") : out_path,
                out.dump(2));
      std::cout << "calibration written\n";
    }
    return 0;
  } catch (const bhrc::error& e) {
    std::cerr << "error [" << e.code << "]: " << e.what() << "\n";
    return e.config ? 2 : 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
