#pragma once

// Certified search for eigenpairs below a threshold of a symmetric operator
// given only matrix-vector products. A pair (theta, u) is accepted only when
// theta + |residual| clears the threshold, so every reported direction is a
// proof of one eigenvalue below it. Stage 1 runs seeded block Krylov with
// Rayleigh-Ritz, stage 2 certifies candidates in ascending order and repairs
// failures with a Chebyshev-filtered refinement deflated against already
// certified directions (deflation inside the recurrence, since the dominant
// certified direction regrows from roundoff through the filter otherwise),
// and stage 3 hunts from random starts until consecutive misses.

#include <limits>

#include "common.hpp"
#include "rng.hpp"

namespace bhrc {

struct FindOpts {
  int n_probe = 24;       // coordinate probes at the largest estimated row norms
  int hutchinson = 32;    // Rademacher probes for the row-norm estimate
  int n_rand = 4;
  int expansions = 3;     // block Krylov expansions
  int sweep_cap = 8;      // certified pairs at which the random sweep stops
  int miss_limit = 2;     // consecutive failed hunts before giving up
  int filter_order = 60;
  int refine_rounds = 4;
  int krylov = 6;
};

struct CertResult {
  int count = 0;
  Vec values;
  Mat vectors;       // orthonormal columns
  bool certified = true;
};

// Adapter giving a plain symmetric sparse matrix the operator interface.
struct SpMatOp {
  const SpMat* A = nullptr;
  Vec mask;

  int n() const { return int(A->rows()); }
  Mat apply(const Mat& X) const {
    Mat Y = mask.asDiagonal() * X;
    Y = (*A) * Y;
    return mask.asDiagonal() * Y;
  }
  Vec apply(const Vec& x) const { return mask.asDiagonal() * ((*A) * (mask.asDiagonal() * x).eval()); }
};

// Largest eigenvalue estimate by Lanczos with full reorthogonalization.
// (A shifted power iteration stalls on these operators: the shift makes the
// top of the positive part nearly degenerate with the zero bulk.)
template <class Op>
double lanczos_lambda_max(const Op& op, Rng& rng, int steps = 80) {
  const int n = op.n();
  steps = std::min(steps, n);
  Mat V(n, steps + 1);
  Vec alpha = Vec::Zero(steps), beta = Vec::Zero(steps);
  Vec v = rng.gaussian_vec(n);
  v /= v.norm();
  V.col(0) = v;
  int m = steps;
  for (int j = 0; j < steps; ++j) {
    Vec w = op.apply(Vec(V.col(j)));
    alpha[j] = V.col(j).dot(w);
    w -= alpha[j] * V.col(j);
    if (j > 0) w -= beta[j - 1] * V.col(j - 1);
    w -= V.leftCols(j + 1) * (V.leftCols(j + 1).transpose() * w);
    beta[j] = w.norm();
    if (beta[j] < 1e-10) {
      m = j + 1;
      break;
    }
    V.col(j + 1) = w / beta[j];
  }
  Mat T = Mat::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    T(i, i) = alpha[i];
    if (i + 1 < m) {
      T(i, i + 1) = beta[i];
      T(i + 1, i) = beta[i];
    }
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(T);
  return std::max(es.eigenvalues()[m - 1], 1.0);
}

// Hutchinson estimate of diag(M^2), the squared row norms.
template <class Op>
Vec hutchinson_row_scores(const Op& op, Rng& rng, int probes) {
  Vec acc = Vec::Zero(op.n());
  for (int p = 0; p < probes; ++p) {
    Vec x(op.n());
    for (int i = 0; i < op.n(); ++i) x[i] = rng.u01() < 0.5 ? -1.0 : 1.0;
    Vec y = op.apply(x);
    acc.array() += y.array().square();
  }
  return acc / double(probes);
}

namespace detail {

inline Mat deproject(Mat X, const Mat& defl) {
  if (defl.cols() == 0) return X;
  X -= defl * (defl.transpose() * X).eval();
  X -= defl * (defl.transpose() * X).eval();
  return X;
}

inline Vec deproject(Vec x, const Mat& defl) {
  if (defl.cols() == 0) return x;
  x -= defl * (defl.transpose() * x).eval();
  x -= defl * (defl.transpose() * x).eval();
  return x;
}

// Chebyshev filter on [0, b]: that interval is damped to |.| <= 1 while an
// eigenvalue -|lam| below it is amplified like exp(2 m sqrt(|lam|/b)).
// Certified directions are projected out after every application so they
// cannot regrow from roundoff during the recurrence.
template <class Op>
Mat cheb_filter(const Op& op, const Mat& X, int order, double b, const Mat& defl) {
  auto amap = [&](const Mat& Y) { return deproject(Mat((2.0 / b) * op.apply(Y) - Y), defl); };
  Mat t0 = deproject(X, defl);
  Mat t1 = amap(t0);
  for (int i = 0; i < order - 1; ++i) {
    Mat t2 = 2.0 * amap(t1) - t0;
    double mx = t2.cwiseAbs().maxCoeff();
    if (mx > 1e120) {
      t1 /= mx;
      t2 /= mx;
    }
    t0.swap(t1);
    t1.swap(t2);
  }
  return t1;
}

struct Refined {
  double theta = std::numeric_limits<double>::infinity();
  Vec u;
  double res = std::numeric_limits<double>::infinity();
  bool valid = false;
};

// Filter, then a short deflated Krylov space, then Rayleigh-Ritz; keep the
// most negative Ritz pair and stop as soon as it certifies below zero.
template <class Op>
Refined refine_candidate(const Op& op, const Vec& u0, double b, const Mat& defl,
                         const FindOpts& opts) {
  Refined best;
  Vec x = deproject(u0, defl);
  double nx = x.norm();
  if (nx < 1e-12) return best;
  x /= nx;
  for (int round = 0; round < opts.refine_rounds; ++round) {
    Mat xf = cheb_filter(op, Mat(x), opts.filter_order, b, defl);
    x = deproject(Vec(xf.col(0)), defl);
    nx = x.norm();
    if (nx < 1e-30) break;
    x /= nx;
    std::vector<Vec> basis{x};
    for (int s = 0; s < opts.krylov; ++s) {
      Vec w = deproject(op.apply(basis.back()), defl);
      for (int pass = 0; pass < 2; ++pass)
        for (const Vec& q : basis) w -= q.dot(w) * q;
      double nw = w.norm();
      if (nw < 1e-10) break;
      basis.push_back(w / nw);
    }
    Mat Q(op.n(), int(basis.size()));
    for (int c = 0; c < Q.cols(); ++c) Q.col(c) = basis[c];
    Mat W = Q.transpose() * op.apply(Q);
    W = 0.5 * (W + W.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Mat> es(W);
    double theta = es.eigenvalues()[0];
    Vec u = Q * es.eigenvectors().col(0);
    double res = (op.apply(u) - theta * u).norm();
    if (theta + res < best.theta + best.res) best = {theta, u, res, true};
    if (theta + res < 0.0) return best;
    x = u;
  }
  return best;
}

}  // namespace detail

// Certified eigenpairs of op below thresh. seeds may have zero columns; b
// must upper-bound the positive spectrum (see lanczos_lambda_max).
template <class Op>
CertResult find_below(const Op& op, double thresh, const Mat& seeds, double b, Rng& rng,
                      const FindOpts& opts = {}) {
  const int n = op.n();
  int ncols = int(seeds.cols()) + (opts.n_probe > 0 ? opts.n_probe : 0) + opts.n_rand;
  Mat block(n, ncols);
  int at = 0;
  if (seeds.cols() > 0) {
    block.leftCols(seeds.cols()) = op.mask.asDiagonal() * seeds;
    at += int(seeds.cols());
  }
  if (opts.n_probe > 0) {
    Vec scores = hutchinson_row_scores(op, rng, opts.hutchinson);
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    std::partial_sort(idx.begin(), idx.begin() + std::min(opts.n_probe, n), idx.end(),
                      [&](int a, int c) { return scores[a] > scores[c]; });
    for (int p = 0; p < std::min(opts.n_probe, n); ++p) {
      Vec e = Vec::Zero(n);
      e[idx[p]] = 1.0;
      block.col(at++) = op.mask.asDiagonal() * e;
    }
  }
  for (int p = 0; p < opts.n_rand; ++p) block.col(at++) = rng.gaussian_vec(n);
  block.conservativeResize(n, at);

  Mat Q(n, 0);
  for (int it = 0; it <= opts.expansions; ++it) {
    Mat Bn = detail::deproject(block, Q);
    const int c = std::min<int>(int(Bn.cols()), n);
    Eigen::HouseholderQR<Mat> qr(Bn);
    Mat thinQ = qr.householderQ() * Mat::Identity(n, c);
    Mat R = qr.matrixQR().topLeftCorner(c, Bn.cols());
    double rmax = std::max(1.0, R.cwiseAbs().maxCoeff());
    std::vector<int> keep;
    for (int i = 0; i < c; ++i)
      if (std::abs(R(i, i)) > 1e-10 * rmax) keep.push_back(i);
    if (keep.empty()) break;
    Mat qn(n, int(keep.size()));
    for (int i = 0; i < int(keep.size()); ++i) qn.col(i) = thinQ.col(keep[i]);
    Mat merged(n, Q.cols() + qn.cols());
    merged << Q, qn;
    Q = std::move(merged);
    if (it < opts.expansions) block = op.apply(qn);
  }

  CertResult out;
  if (Q.cols() == 0) return out;
  Mat W = Q.transpose() * op.apply(Q);
  W = 0.5 * (W + W.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Mat> es(W);
  Vec theta = es.eigenvalues();
  Mat Uc = Q * es.eigenvectors();

  std::vector<double> out_t;
  std::vector<Vec> out_u;
  auto defl_mat = [&]() {
    Mat D(n, int(out_u.size()));
    for (int i = 0; i < int(out_u.size()); ++i) D.col(i) = out_u[i];
    return D;
  };
  auto accept = [&](double t, Vec u) {
    if (!out_u.empty()) {
      u = detail::deproject(std::move(u), defl_mat());
      double nu = u.norm();
      if (nu < 1e-8) return false;
      u /= nu;
    }
    out_t.push_back(t);
    out_u.push_back(std::move(u));
    return true;
  };

  for (int i = 0; i < theta.size() && theta[i] < thresh; ++i) {
    Vec u = Uc.col(i);
    double res = (op.apply(u) - theta[i] * u).norm();
    if (theta[i] + res < thresh) {
      accept(theta[i], u);
      continue;
    }
    detail::Refined ref = detail::refine_candidate(op, u, b, defl_mat(), opts);
    if (ref.valid && ref.theta + ref.res < thresh)
      accept(ref.theta, ref.u);
    else
      out.certified = false;
  }

  int misses = 0;
  while (int(out_t.size()) < opts.sweep_cap) {
    Vec x = rng.gaussian_vec(n).cwiseProduct(op.mask);
    detail::Refined ref = detail::refine_candidate(op, x, b, defl_mat(), opts);
    if (ref.valid && ref.theta + ref.res < thresh && accept(ref.theta, ref.u)) {
      misses = 0;
    } else {
      misses += 1;
      if (misses >= opts.miss_limit) break;
    }
  }

  out.count = int(out_t.size());
  out.values.resize(out.count);
  for (int i = 0; i < out.count; ++i) out.values[i] = out_t[i];
  if (out.count > 0) {
    Mat U = defl_mat();
    Eigen::HouseholderQR<Mat> qr(U);
    out.vectors = qr.householderQ() * Mat::Identity(n, out.count);
  } else {
    out.vectors = Mat(n, 0);
  }
  return out;
}

}  // namespace bhrc
