#pragma once

// Block-model description and algorithm parameters: validation of (M, pi, d),
// spectral analysis of the transition matrix T = M diag(pi), the
// Kesten-Stigum signal, SBM sampling, the certification polynomial p, and the
// grid search that fixes (ell, delta, t) plus every derived constant.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "common.hpp"
#include "rng.hpp"

namespace bhrc {

struct ModelParams {
  int k = 0;
  Mat M;    // k x k symmetric, nonnegative, M pi = 1 entrywise
  Vec pi;   // strictly positive, sums to 1
  double d = 0.0;
};

inline void validate_params(const ModelParams& mp) {
  check_config(mp.k >= 1, "BadDimension", "k must be >= 1");
  check_config(mp.M.rows() == mp.k && mp.M.cols() == mp.k, "BadDimension",
               "M must be k x k");
  check_config(mp.pi.size() == mp.k, "BadDimension", "pi must have k entries");
  check_config(mp.d >= 0.0, "InvalidDegree", "average degree d must be nonnegative");

  double mscale = std::max(1.0, mp.M.cwiseAbs().maxCoeff());
  check_config((mp.M - mp.M.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * mscale,
               "NonSymmetric", "M must be symmetric");
  check_config(mp.M.minCoeff() >= 0.0, "NegativeEntry", "M entries must be nonnegative");

  check_config(mp.pi.minCoeff() > 0.0, "NotSimplex", "pi entries must be positive");
  check_config(std::abs(mp.pi.sum() - 1.0) <= 1e-12, "NotSimplex", "pi must sum to 1");

  Vec mpi = mp.M * mp.pi;
  check_config((mpi.array() - 1.0).abs().maxCoeff() <= 1e-10, "NormalizationViolated",
               "M pi must equal the all-ones vector");
}

struct TransitionSpec {
  Mat T;            // M diag(pi)
  Vec eigenvalues;  // trivial eigenvalue 1 first, then by decreasing modulus
  double lambda2 = 0.0;
  int r = 0;        // multiplicity of lambda2
  int rprime = 0;   // embedding dimension used by the rounding phase
  Mat Psi;          // k x (k-1), pi-orthonormal nontrivial right eigenvectors
  Mat Psi_r;        // first rprime columns of Psi
  Mat phi;          // == Psi_r; rows are the community embeddings in R^rprime
};

// Eigenstructure of T via the symmetric conjugate Pi^{1/2} M Pi^{1/2}. Right
// eigenvectors psi = Pi^{-1/2} v come out pi-orthonormal for free.
inline TransitionSpec analyze_transition(const ModelParams& mp, double mult_tol = 1e-6) {
  validate_params(mp);
  const int k = mp.k;
  Vec sq = mp.pi.array().sqrt();
  Mat S = sq.asDiagonal() * mp.M * sq.asDiagonal();
  S = 0.5 * (S + S.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Mat> es(S);
  check_invariant(es.info() == Eigen::Success, "EigFailure", "transition eigensolve failed");
  Vec ev = es.eigenvalues();
  Mat V = es.eigenvectors();

  // The trivial eigenpair is (1, sqrt(pi)); identify it by overlap.
  int triv = 0;
  double best = -1.0;
  for (int i = 0; i < k; ++i) {
    double ov = std::abs(V.col(i).dot(sq));
    if (ov > best) {
      best = ov;
      triv = i;
    }
  }
  check_invariant(std::abs(ev[triv] - 1.0) <= 1e-8, "EigFailure",
                  "trivial transition eigenvalue not found near 1");

  std::vector<int> rest;
  for (int i = 0; i < k; ++i)
    if (i != triv) rest.push_back(i);
  std::sort(rest.begin(), rest.end(), [&](int a, int b) {
    double ma = std::abs(ev[a]), mb = std::abs(ev[b]);
    if (std::abs(ma - mb) > 1e-14 * std::max(1.0, std::max(ma, mb))) return ma > mb;
    if (ev[a] != ev[b]) return ev[a] > ev[b];
    return a < b;
  });

  TransitionSpec ts;
  ts.T = mp.M * mp.pi.asDiagonal();
  ts.eigenvalues.resize(k);
  ts.eigenvalues[0] = 1.0;
  for (int i = 0; i < k - 1; ++i) ts.eigenvalues[i + 1] = ev[rest[i]];

  check_config(k >= 2, "DegenerateSpectrum", "k = 1 has no nontrivial eigenvalue");
  ts.lambda2 = ts.eigenvalues[1];
  check_config(std::abs(ts.lambda2) >= 1e-12, "DegenerateSpectrum",
               "lambda2 is numerically zero");
  check_config(1.0 - std::abs(ts.lambda2) > mult_tol, "DegenerateSpectrum",
               "lambda2 ties the trivial eigenvalue");

  ts.r = 0;
  for (int i = 1; i < k; ++i)
    if (std::abs(ts.eigenvalues[i] - ts.lambda2) <= mult_tol * std::abs(ts.lambda2)) ts.r += 1;

  ts.rprime = ts.lambda2 > 0.0 ? ts.r - 1 : ts.r;
  if (k == 2) ts.rprime = std::max(ts.rprime, 1);

  ts.Psi.resize(k, k - 1);
  for (int i = 0; i < k - 1; ++i) {
    Vec psi = V.col(rest[i]).array() / sq.array();
    for (int j = 0; j < k; ++j) {
      if (std::abs(psi[j]) > 1e-9) {
        if (psi[j] < 0.0) psi = -psi;
        break;
      }
    }
    ts.Psi.col(i) = psi;
  }
  ts.Psi_r = ts.Psi.leftCols(ts.rprime);
  ts.phi = ts.Psi_r;
  return ts;
}

// lambda2^2 d - 1: positive above the Kesten-Stigum threshold.
inline double ks_signal(const ModelParams& mp, double mult_tol = 1e-6) {
  TransitionSpec ts = analyze_transition(mp, mult_tol);
  return ts.lambda2 * ts.lambda2 * mp.d - 1.0;
}

struct Assignment {
  int k = 0;
  std::vector<int> labels;

  int n() const { return int(labels.size()); }

  std::vector<int> counts() const {
    std::vector<int> c(k, 0);
    for (int x : labels) c[x] += 1;
    return c;
  }

  // n x k one-hot indicator matrix.
  Mat one_hot() const {
    Mat X = Mat::Zero(n(), k);
    for (int v = 0; v < n(); ++v) X(v, labels[v]) = 1.0;
    return X;
  }
};

}  // namespace bhrc

#include "sparsegraph.hpp"

namespace bhrc {

// Labels i.i.d. from pi, then every unordered pair {u, v} gets an edge with
// probability M(x_u, x_v) d / n, one Bernoulli draw per pair in row order.
inline std::pair<Assignment, SparseGraph> sample_sbm(const ModelParams& mp, int n,
                                                     std::uint64_t seed) {
  validate_params(mp);
  check_config(n >= 1, "BadDimension", "n must be >= 1");
  check_config(mp.d * mp.M.maxCoeff() / n <= 1.0, "ProbabilityOverflow",
               "d * max(M) / n exceeds 1; edge probabilities invalid");
  Rng rng(seed);

  Assignment x;
  x.k = mp.k;
  x.labels.resize(n);
  std::vector<double> cum(mp.k);
  double acc = 0.0;
  for (int c = 0; c < mp.k; ++c) {
    acc += mp.pi[c];
    cum[c] = acc;
  }
  for (int v = 0; v < n; ++v) {
    double u = rng.u01();
    int c = 0;
    while (c < mp.k - 1 && u >= cum[c]) ++c;
    x.labels[v] = c;
  }

  Mat prob = mp.M * (mp.d / n);
  std::vector<std::pair<int, int>> edges;
  for (int u = 0; u < n; ++u) {
    const int cu = x.labels[u];
    for (int v = u + 1; v < n; ++v) {
      if (rng.u01() < prob(cu, x.labels[v])) edges.emplace_back(u, v);
    }
  }
  return {std::move(x), make_graph(n, std::move(edges))};
}

// Certification polynomial, term-by-term sum form.
inline double eval_p(double lam, double d, int ell, double t) {
  double p = -t * std::pow(d, 2 * ell - 1) * std::pow(lam, 2 * ell - 1) *
             (1.0 - lam * lam * d * d);
  p += t * t * std::pow(d, 2 * ell) * std::pow(lam, 2 * ell);
  for (int s = 0; s <= ell; ++s) {
    p += std::pow(d, 2 * ell - s) * std::pow(lam, 2 * ell - 2 * s);
    p += -2.0 * t * std::pow(d, 2 * ell - s + 1) * std::pow(lam, 2 * ell - 2 * s + 1);
    p += t * t * std::pow(d, 2 * ell - s + 1) * std::pow(lam, 2 * ell - 2 * s);
  }
  return p;
}

// Factored geometric-series form of the same polynomial.
inline double eval_p_closed(double lam, double d, int ell, double t) {
  double q = lam * lam * d;
  check_config(std::abs(q - 1.0) >= 1e-12, "SeriesSingularity",
               "lambda^2 d = 1: closed form undefined");
  double y = lam * d;
  double S = (1.0 - std::pow(q, -(ell + 1))) / (1.0 - 1.0 / q);
  return std::pow(y, 2 * ell) *
         (t * t - (t / y) * (1.0 - y * y) + (1.0 - 2.0 * y * t + d * t * t) * S);
}

struct AlgoParams {
  double eps = 0.0;      // lambda2^2 d - 1
  int ell = 0;
  double delta_t = 0.0;  // the grid-selected delta in t = (1 + delta) / (lambda2 d)
  double t = 0.0;
  double p_value = 0.0;  // p(lambda2) at the selected (ell, t)
  double upsilon = 0.0;
  double eta = 0.0;
  int B = 0;
  double Kcap = 0.0;
  double tau = 0.0;
  double C = 0.0;        // 1 / sqrt(min pi)
  int r = 0;
  int rprime = 0;
};

namespace detail {

// delta grid {0.01 * 2^j} restricted to [2^-10, 1].
inline std::vector<double> delta_grid() {
  std::vector<double> out;
  for (int j = -20;; ++j) {
    double v = 0.01 * std::pow(2.0, j);
    if (v > 1.0) break;
    if (v >= std::pow(2.0, -10)) out.push_back(v);
  }
  return out;
}

// Smallest B >= 8d whose Poisson(d) upper Chernoff tail is <= 1e-4,
// capped at 10 d (ell + 1).
inline int pick_degree_cap(double d, int ell) {
  int B = int(std::ceil(8.0 * d));
  int cap = std::max(B, int(std::floor(10.0 * d * (ell + 1))));
  while (B < cap) {
    double logtail = -d + double(B) * (1.0 + std::log(d) - std::log(double(B)));
    if (logtail <= std::log(1e-4)) break;
    ++B;
  }
  return B;
}

}  // namespace detail

// Grid search for (ell, delta): smallest ell whose best delta drives
// p(lambda2) below -p_margin, then every downstream constant, with explicit
// overrides honored verbatim and everything they feed recomputed.
inline AlgoParams select_parameters(const ModelParams& mp,
                                    const std::map<std::string, double>& overrides = {},
                                    double mult_tol = 1e-6, int ell_max = 40,
                                    double p_margin = 1e-3) {
  TransitionSpec ts = analyze_transition(mp, mult_tol);
  const double lam2 = ts.lambda2;
  const double d = mp.d;
  check_config(std::abs(lam2 * lam2 * d - 1.0) >= 1e-12, "NoFeasibleParams",
               "signal sits exactly at threshold, the certificate series diverges");

  auto ov = [&](const char* key, double fallback) {
    auto it = overrides.find(key);
    return it == overrides.end() ? fallback : it->second;
  };
  auto has = [&](const char* key) { return overrides.count(key) > 0; };

  AlgoParams ap;
  ap.r = ts.r;
  ap.rprime = ts.rprime;
  ap.C = 1.0 / std::sqrt(mp.pi.minCoeff());
  ap.eps = ov("eps", lam2 * lam2 * d - 1.0);

  std::vector<double> grid = detail::delta_grid();
  auto best_delta_at = [&](int ell) {
    double bp = std::numeric_limits<double>::infinity(), bd = 0.0;
    for (double dl : grid) {
      double t = (1.0 + dl) / (lam2 * d);
      double p = eval_p_closed(lam2, d, ell, t);
      if (p < bp) {
        bp = p;
        bd = dl;
      }
    }
    return std::make_pair(bp, bd);
  };

  if (has("ell") && has("delta_t")) {
    ap.ell = int(ov("ell", 0));
    ap.delta_t = ov("delta_t", 0.0);
  } else if (has("ell")) {
    ap.ell = int(ov("ell", 0));
    ap.delta_t = best_delta_at(ap.ell).second;
  } else if (has("delta_t")) {
    ap.delta_t = ov("delta_t", 0.0);
    ap.ell = 0;
    for (int ell = 1; ell <= ell_max; ++ell) {
      double t = (1.0 + ap.delta_t) / (lam2 * d);
      if (eval_p_closed(lam2, d, ell, t) <= -p_margin) {
        ap.ell = ell;
        break;
      }
    }
    check_config(ap.ell > 0, "NoFeasibleParams",
                 "no ell makes p(lambda2) certifiably negative at the given delta");
  } else {
    ap.ell = 0;
    double fallback_p = std::numeric_limits<double>::infinity();
    int fallback_ell = 0;
    double fallback_d = 0.0;
    for (int ell = 1; ell <= ell_max; ++ell) {
      auto [p, dl] = best_delta_at(ell);
      if (p <= -p_margin) {
        ap.ell = ell;
        ap.delta_t = dl;
        break;
      }
      if (p < fallback_p) {
        fallback_p = p;
        fallback_ell = ell;
        fallback_d = dl;
      }
    }
    if (ap.ell == 0) {
      check_config(fallback_p < 0.0, "NoFeasibleParams",
                   "p(lambda2) is nonnegative over the whole (ell, delta) grid");
      ap.ell = fallback_ell;
      ap.delta_t = fallback_d;
    }
  }

  ap.t = ov("t", (1.0 + ap.delta_t) / (lam2 * d));
  ap.p_value = eval_p_closed(lam2, d, ap.ell, ap.t);
  double q = lam2 * lam2 * d;
  ap.upsilon = ov("upsilon", std::abs(ap.p_value) / 2.0 * std::pow(q, -2.0 * ap.ell));
  if (!has("upsilon"))
    check_config(ap.p_value < 0.0, "NoFeasibleParams",
                 "selected (ell, t) gives nonnegative p(lambda2)");
  ap.eta = ov("eta", ap.upsilon / 48.0);
  ap.B = int(ov("B", double(detail::pick_degree_cap(d, ap.ell))));
  ap.Kcap = ov("Kcap", std::pow(double(ap.B), 2.0 * ap.ell + 3.0));
  ap.tau = ov("tau", 2.0 * ap.C * ap.C * ap.Kcap * ap.Kcap * ap.r / (ap.eta * ap.eta));
  return ap;
}

// Plain-text model file: one "key value(s)" pair per line, with M given as k
// whitespace-separated rows (either k lines of k entries after a lone "M", or
// repeated "M row..." lines). '#' starts a comment.
inline ModelParams parse_model_text(std::istream& in) {
  ModelParams mp;
  std::vector<double> mrows;
  bool expect_matrix_rows = false;
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;

    if (expect_matrix_rows) {
      std::istringstream row(line);
      double v;
      while (row >> v) mrows.push_back(v);
      if (int(mrows.size()) >= mp.k * mp.k) expect_matrix_rows = false;
      continue;
    }

    if (key == "k") {
      check_config(bool(ls >> mp.k), "ParseError", "k needs an integer value");
    } else if (key == "d") {
      check_config(bool(ls >> mp.d), "ParseError", "d needs a numeric value");
    } else if (key == "pi") {
      double v;
      std::vector<double> vals;
      while (ls >> v) vals.push_back(v);
      mp.pi = Eigen::Map<Vec>(vals.data(), vals.size());
    } else if (key == "M") {
      double v;
      int got = 0;
      while (ls >> v) {
        mrows.push_back(v);
        ++got;
      }
      if (got == 0) {
        check_config(mp.k > 0, "ParseError", "k must precede a bare M block");
        expect_matrix_rows = true;
      }
    } else {
      fail_config("ParseError", "unknown model key '" + key + "'");
    }
  }
  check_config(mp.k > 0, "ParseError", "model file missing k");
  check_config(int(mrows.size()) == mp.k * mp.k, "ParseError",
               "model file M needs exactly k*k entries");
  mp.M.resize(mp.k, mp.k);
  for (int i = 0; i < mp.k; ++i)
    for (int j = 0; j < mp.k; ++j) mp.M(i, j) = mrows[i * mp.k + j];
  check_config(mp.pi.size() == mp.k, "ParseError", "model file pi needs k entries");
  validate_params(mp);
  return mp;
}

inline ModelParams load_model(const std::string& path) {
  std::ifstream f(path);
  check_config(f.good(), "ParseError", "cannot open model file " + path);
  return parse_model_text(f);
}

}  // namespace bhrc
