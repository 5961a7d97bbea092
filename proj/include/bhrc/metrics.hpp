#pragma once

// Scoring: the weak-recovery correlation rho between an estimated soft (or
// one-hot) assignment and the truth, computed through k x k inner matrices in
// the nontrivial eigenvector coordinates; a confusion-matrix expansion of the
// same inner product; the set-based partition advantage; and plug-in mutual
// information.

#include "common.hpp"
#include "model.hpp"
#include "rng.hpp"

#include <cmath>

namespace bhrc {

struct RecoveryScore {
  double rho = 0.0;
  double raw_inner = 0.0;  // ||Psi^T X^T W Psi||_F^2
  double frob_w = 0.0;     // ||Psi^T W^T W Psi||_F
  double frob_x = 0.0;     // ||Psi^T X^T X Psi||_F
  Mat confusion;           // (q,j): mean weight on q over true community j
};

inline Mat confusion_matrix(const Mat& W, const Assignment& truth) {
  const int k = truth.k;
  const int n = truth.n();
  check_config(int(W.rows()) == n && int(W.cols()) == k, "BadDimension",
               "weight matrix shape must be n x k");
  std::vector<int> cnt = truth.counts();
  Mat P = Mat::Zero(k, k);
  for (int v = 0; v < n; ++v) P.col(truth.labels[v]) += W.row(v).transpose();
  for (int j = 0; j < k; ++j) {
    if (cnt[j] == 0) fail_config("EmptyCommunity", "a true community has no vertices");
    P.col(j) /= double(cnt[j]);
  }
  return P;
}

// Everything runs through k x k products: X^T W, W^T W and X^T X are formed
// without materializing any n x n object.
inline RecoveryScore weak_recovery_corr(const Mat& W, const Assignment& truth,
                                        const TransitionSpec& ts) {
  const int k = truth.k;
  const int n = truth.n();
  check_config(int(W.rows()) == n && int(W.cols()) == k, "BadDimension",
               "weight matrix shape must be n x k");

  Mat XtW = Mat::Zero(k, k);
  Vec cnt = Vec::Zero(k);
  for (int v = 0; v < n; ++v) {
    XtW.row(truth.labels[v]) += W.row(v);
    cnt[truth.labels[v]] += 1.0;
  }
  Mat WtW = W.transpose() * W;

  RecoveryScore rep;
  rep.raw_inner = (ts.Psi.transpose() * XtW * ts.Psi).squaredNorm();
  rep.frob_w = (ts.Psi.transpose() * WtW * ts.Psi).norm();
  rep.frob_x = (ts.Psi.transpose() * Mat(cnt.asDiagonal()) * ts.Psi).norm();
  check_invariant(rep.frob_w > 1e-12 && rep.frob_x > 1e-12, "ZeroNorm",
                  "degenerate Gram factor in the correlation");
  rep.rho = rep.raw_inner / (rep.frob_w * rep.frob_x);
  check_invariant(rep.rho >= 0.0 && rep.rho <= 1.0 + 1e-9, "RhoOutOfRange",
                  "correlation left [0, 1]");
  rep.confusion = confusion_matrix(W, truth);
  return rep;
}

inline Vec empirical_marginal(const Assignment& a) {
  Vec q = Vec::Zero(a.k);
  for (int x : a.labels) q[x] += 1.0;
  return q / double(a.n());
}

// Confusion form of raw_inner: exact in expectation, within 0.02 n^2 of the
// direct value at desk scale once community sizes concentrate.
inline double correlation_expansion(const Assignment& xhat, const Assignment& truth,
                                    const Vec& pi) {
  const int n = truth.n();
  check_config(xhat.n() == n, "BadDimension", "assignments must cover the same vertices");
  Mat P = confusion_matrix(xhat.one_hot(), truth);
  Vec q = empirical_marginal(xhat);
  const int k = truth.k;
  double acc = 0.0;
  for (int i = 0; i < int(xhat.k); ++i) {
    for (int j = 0; j < k; ++j) acc += pi[j] / pi[i] * P(i, j) * P(i, j);
  }
  for (int i = 0; i < xhat.k; ++i) acc -= q[i] * q[i] / pi[i];
  return double(n) * double(n) * acc;
}

inline double rho_of_assignment(const Assignment& xhat, const Assignment& truth,
                                const TransitionSpec& ts) {
  return weak_recovery_corr(xhat.one_hot(), truth, ts).rho;
}

// Max over ordered community pairs of the inclusion-rate gap of S.
inline double partition_advantage(const std::vector<int>& S, const Assignment& truth) {
  const int k = truth.k;
  std::vector<int> cnt = truth.counts();
  std::vector<double> inS(k, 0.0);
  for (int v : S) {
    check_config(v >= 0 && v < truth.n(), "BadDimension", "set index out of range");
    inS[truth.labels[v]] += 1.0;
  }
  double best = 0.0;
  for (int i = 0; i < k; ++i) {
    if (cnt[i] == 0) fail_config("EmptyCommunity", "a true community has no vertices");
    for (int j = 0; j < k; ++j) {
      if (j == i || cnt[j] == 0) continue;
      best = std::max(best, inS[i] / double(cnt[i]) - inS[j] / double(cnt[j]));
    }
  }
  return best;
}

// The derived set for the implication chain: vertices carrying the estimate's
// most common label.
inline std::vector<int> majority_set(const Assignment& xhat) {
  std::vector<int> cnt = xhat.counts();
  int top = 0;
  for (int q = 1; q < xhat.k; ++q) {
    if (cnt[q] > cnt[top]) top = q;
  }
  std::vector<int> S;
  for (int v = 0; v < xhat.n(); ++v) {
    if (xhat.labels[v] == top) S.push_back(v);
  }
  return S;
}

// Total plug-in mutual information n * I(xhat; x) in nats.
inline double mutual_information(const Assignment& xhat, const Assignment& truth) {
  const int n = truth.n();
  check_config(xhat.n() == n, "BadDimension", "assignments must cover the same vertices");
  Mat J = Mat::Zero(xhat.k, truth.k);
  for (int v = 0; v < n; ++v) J(xhat.labels[v], truth.labels[v]) += 1.0;
  J /= double(n);
  Vec pq = J.rowwise().sum();
  Vec pj = J.colwise().sum();
  double info = 0.0;
  for (int q = 0; q < xhat.k; ++q) {
    for (int j = 0; j < truth.k; ++j) {
      if (J(q, j) > 0.0) info += J(q, j) * std::log(J(q, j) / (pq[q] * pj[j]));
    }
  }
  return double(n) * info;
}

}  // namespace bhrc
