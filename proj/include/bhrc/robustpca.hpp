#pragma once

// Robust subspace recovery: while the count of eigenvalues below -eta exceeds
// the guard (2K/eta) r, sample a vertex proportional to the diagonal of the
// projector onto that eigenspace and zero its row and column; afterwards drop
// heavy-diagonal vertices (tau/n cutoff) and eigen-truncate the restricted
// projector at eta/K. The explicit path works on a dense copy with exact
// counts; the operator path uses the certified filtered search and is what
// the pipeline runs beyond the dense cutoff.

#include <set>

#include "certify.hpp"
#include "common.hpp"
#include "graphmat.hpp"
#include "model.hpp"
#include "rng.hpp"
#include "spectra.hpp"

namespace bhrc {

// Matrix-free masked sandwich: x -> P A^(l) H A^(l) P x with P the 0/1 mask.
struct MOperator {
  NbPowerApplier pw;
  SpMat H;
  Vec mask;

  MOperator() = default;
  MOperator(const TruncationResult& tr, double t, int ell)
      : pw(tr.graph, ell), H(bethe_hessian_truncated(tr, t)), mask(Vec::Ones(tr.graph.n)) {}

  int n() const { return int(H.rows()); }

  Mat apply(const Mat& X) const {
    Mat Y = mask.asDiagonal() * X;
    Y = pw.apply(Y);
    Y = H * Y;
    Y = pw.apply(Y);
    return mask.asDiagonal() * Y;
  }

  Vec apply(const Vec& x) const {
    Mat X = apply(Mat(x));
    return X.col(0);
  }
};

struct TrimState {
  std::vector<int> removed;
  std::vector<int> phi_history;  // count at entry to each loop test, then final
  int step = 0;
  Vec mask;       // 1 kept, 0 removed
  Mat current;    // dense masked matrix (explicit path only, empty otherwise)

  void write_csv(std::ostream& out, const std::vector<int>* q = nullptr) const {
    std::set<int> qs;
    if (q) qs.insert(q->begin(), q->end());
    out << "# trim-trace v1: step,phi,removed,in_q\n";
    for (std::size_t s = 0; s < phi_history.size(); ++s) {
      out << s << "," << phi_history[s] << ",";
      if (s < removed.size()) {
        out << removed[s] << "," << (q ? (qs.count(removed[s]) ? "1" : "0") : "");
      } else {
        out << ",";
      }
      out << "\n";
    }
  }
};

struct RecoveredSubspace {
  Mat U;                    // orthonormal columns
  std::vector<int> S;       // retained vertex set (projector diagonal <= tau/n)
  double diag_bound_witness = 0.0;  // max diagonal of Pi_U
  TrimState trim;
  Vec negative_values;      // certified eigenvalues below -eta at termination
  bool certified = true;
};

namespace detail {

inline void assert_subspace_invariants(const RecoveredSubspace& rs, const AlgoParams& ap,
                                       int n) {
  double diag_bound = ap.Kcap * ap.tau / (ap.eta * double(n));
  check_invariant(rs.diag_bound_witness <= diag_bound + 1e-12, "DelocalizationViolated",
                  "projector diagonal exceeds K tau / (eta n)");
  double dim_bound = 2.0 * ap.Kcap * ap.Kcap * ap.r / (ap.eta * ap.eta);
  check_invariant(double(rs.U.cols()) <= dim_bound + 1e-9, "DimensionViolated",
                  "recovered dimension exceeds 2 K^2 r / eta^2");
}

// Shared tail of both trim paths: S-restriction and eigen-truncation of the
// restricted projector, via the Gram matrix of the S-masked eigenvectors.
inline RecoveredSubspace postprocess_pairs(const Vec& vals, const Mat& vecs,
                                           const AlgoParams& ap, TrimState state) {
  const int n = int(vecs.rows());
  RecoveredSubspace rs;
  rs.trim = std::move(state);
  rs.negative_values = vals;
  if (vecs.cols() == 0) fail_invariant("EmptySubspace", "projector is zero after trimming");

  Vec diag = vecs.array().square().rowwise().sum();
  double cut = ap.tau / double(n);
  Vec smask = Vec::Zero(n);
  for (int i = 0; i < n; ++i) {
    if (diag[i] <= cut) {
      smask[i] = 1.0;
      rs.S.push_back(i);
    }
  }
  Mat Vs = smask.asDiagonal() * vecs;
  Mat G = Vs.transpose() * Vs;
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (G + G.transpose()));
  Vec w = es.eigenvalues();
  double keep_cut = ap.eta / ap.Kcap;
  std::vector<int> keep;
  for (int i = 0; i < w.size(); ++i)
    if (w[i] >= keep_cut) keep.push_back(i);
  if (keep.empty()) fail_invariant("EmptySubspace", "no eigenvalue of the restricted projector clears eta/K");

  Mat Uraw(n, int(keep.size()));
  for (int i = 0; i < int(keep.size()); ++i)
    Uraw.col(i) = Vs * es.eigenvectors().col(keep[i]) / std::sqrt(w[keep[i]]);
  Eigen::HouseholderQR<Mat> qr(Uraw);
  rs.U = qr.householderQ() * Mat::Identity(n, int(keep.size()));
  rs.diag_bound_witness = rs.U.array().square().rowwise().sum().maxCoeff();
  assert_subspace_invariants(rs, ap, n);
  return rs;
}

}  // namespace detail

// Explicit-matrix trimming loop on a dense working copy; eigensolves give the
// exact projector each iteration.
inline TrimState trim(const SpMat& Mtilde, int r, const AlgoParams& ap, std::uint64_t seed) {
  const int n = int(Mtilde.rows());
  check_config(Mtilde.cols() == n, "BadDimension", "matrix must be square");
  Rng rng(seed);
  TrimState st;
  st.mask = Vec::Ones(n);
  st.current = Mat(Mtilde);
  st.current = 0.5 * (st.current + st.current.transpose()).eval();
  const double guard = (2.0 * ap.Kcap / ap.eta) * double(r);

  for (int iter = 0; iter <= n; ++iter) {
    Eigen::SelfAdjointEigenSolver<Mat> es(st.current);
    check_invariant(es.info() == Eigen::Success, "EigFailure", "trim eigensolve failed");
    Vec ev = es.eigenvalues();
    int cnt = 0;
    while (cnt < ev.size() && ev[cnt] < -ap.eta) ++cnt;
    st.phi_history.push_back(cnt);
    if (double(cnt) <= guard) return st;

    Vec diag = es.eigenvectors().leftCols(cnt).array().square().rowwise().sum();
    for (int idx : st.removed) diag[idx] = 0.0;
    int i = rng.discrete(diag);
    st.removed.push_back(i);
    st.mask[i] = 0.0;
    st.current.row(i).setZero();
    st.current.col(i).setZero();
    st.step += 1;
  }
  fail_invariant("IterationCapExceeded", "trimming loop exceeded n deletions");
}

// postprocess per the contract: recompute the projector of the final masked
// matrix, restrict to the light-diagonal set, truncate at eta/K.
inline RecoveredSubspace postprocess(const TrimState& state, const AlgoParams& ap) {
  check_config(state.current.size() > 0, "BadDimension",
               "postprocess needs the explicit-path trim state");
  Eigen::SelfAdjointEigenSolver<Mat> es(state.current);
  Vec ev = es.eigenvalues();
  int cnt = 0;
  while (cnt < ev.size() && ev[cnt] < -ap.eta) ++cnt;
  return detail::postprocess_pairs(ev.head(cnt), es.eigenvectors().leftCols(cnt), ap,
                                   state);
}

inline RecoveredSubspace recover_subspace(const SpMat& Mtilde, int r, const AlgoParams& ap,
                                          std::uint64_t seed) {
  TrimState st = trim(Mtilde, r, ap, seed);
  return postprocess(st, ap);
}

// Operator-path trimming: certified counts, same sampling rule. The recorded
// count is clamped to its running minimum (interlacing says the true count
// cannot grow; the certified finder is a lower bound, so a late find would
// otherwise read as an increase).
template <class Op>
std::pair<TrimState, CertResult> trim_operator(Op& op, const Mat& seeds, int r,
                                               const AlgoParams& ap, double b, Rng& rng,
                                               const FindOpts& opts = {}) {
  const int n = op.n();
  TrimState st;
  st.mask = Vec::Ones(n);
  const double guard = (2.0 * ap.Kcap / ap.eta) * double(r);
  int prev = std::numeric_limits<int>::max();

  for (int iter = 0; iter <= n; ++iter) {
    CertResult res = find_below(op, -ap.eta, seeds, b, rng, opts);
    int phi = std::min(res.count, prev);
    prev = phi;
    st.phi_history.push_back(phi);
    if (double(phi) <= guard) {
      st.mask = op.mask;
      return {std::move(st), std::move(res)};
    }
    Vec diag = res.vectors.array().square().rowwise().sum();
    for (int idx : st.removed) diag[idx] = 0.0;
    int i = rng.discrete(diag);
    st.removed.push_back(i);
    op.mask[i] = 0.0;
    st.step += 1;
  }
  fail_invariant("IterationCapExceeded", "trimming loop exceeded n deletions");
}

template <class Op>
RecoveredSubspace recover_subspace_operator(Op& op, const Mat& seeds, int r,
                                            const AlgoParams& ap, double b, Rng& rng,
                                            const FindOpts& opts = {}) {
  auto [st, res] = trim_operator(op, seeds, r, ap, b, rng, opts);
  RecoveredSubspace rs = detail::postprocess_pairs(res.values, res.vectors, ap,
                                                   std::move(st));
  rs.certified = res.certified;
  return rs;
}

}  // namespace bhrc
