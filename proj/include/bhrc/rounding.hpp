#pragma once

// Convex-hull randomized rounding. A uniformly random rprime-dimensional
// subspace of the recovered span embeds every vertex as a short coordinate
// row; the largest multiple of that row still inside the hull of the
// community embeddings phi defines a simplex weight vector, and one
// categorical draw per vertex produces the label estimate. Weights for the
// shared global scale come from exact convex interpolation against pi, which
// sits in the hull because the nontrivial eigenvectors are pi-centered.

#include "common.hpp"
#include "model.hpp"
#include "rng.hpp"
#include "simplexlp.hpp"

#include <limits>

namespace bhrc {

struct VertexEmbedding {
  Mat Y;  // n x rprime, orthonormal columns spanning a random subspace of U
};

struct HullWeights {
  Mat W;        // n x k, each row on the probability simplex
  Vec scale;    // per-vertex maximal inscription scale (inf for zero rows)
  double c = 0.0;  // shared scale actually used
};

struct RoundResult {
  VertexEmbedding embedding;
  HullWeights weights;
  Assignment xhat;
};

// Haar-random rprime-dimensional subspace of span(U): push a Gaussian matrix
// through U and orthonormalize.
inline VertexEmbedding random_subspace(const Mat& U, int rprime, Rng& rng) {
  const int dim = int(U.cols());
  check_config(rprime >= 1, "BadDimension", "rprime must be positive");
  if (dim < rprime)
    fail_invariant("DimensionTooSmall", "recovered span is thinner than rprime");
  Mat G = rng.gaussian_mat(dim, rprime);
  Eigen::HouseholderQR<Mat> qr(G);
  Mat Q = qr.householderQ() * Mat::Identity(dim, rprime);
  VertexEmbedding emb;
  emb.Y = U * Q;
  return emb;
}

// Largest c >= 0 with c*row inside hull{phi_1,...,phi_k}, and the witness
// weights. Zero rows return an infinite scale with the prior weights, which
// the interpolation in hull_weights turns back into pi.
inline std::pair<double, Vec> max_inscribe_scale(const Vec& row, const Mat& phi,
                                                 const Vec& pi) {
  const int k = int(phi.rows());
  const int dim = int(phi.cols());
  check_config(row.size() == dim && pi.size() == k, "BadDimension",
               "embedding row and hull dimensions disagree");
  const double scale = row.norm();
  if (scale <= 1e-12)
    return {std::numeric_limits<double>::infinity(), pi};

  // solve along the unit direction so the simplex pivots see O(1) entries
  // whatever the row magnitude, then rescale the optimum
  Vec unit = row / scale;
  Mat A = Mat::Zero(dim + 1, k + 1);
  A.block(0, 0, dim, k) = phi.transpose();
  A.block(0, k, dim, 1) = -unit;
  A.row(dim).head(k).setOnes();
  Vec b = Vec::Zero(dim + 1);
  b[dim] = 1.0;
  Vec cost = Vec::Zero(k + 1);
  cost[k] = -1.0;

  LpResult lp = solve_lp(A, b, cost);
  if (lp.status == LpStatus::infeasible)
    fail_invariant("HullDegenerate", "no hull point on the ray through this row");
  check_invariant(lp.status == LpStatus::optimal, "HullUnbounded",
                  "inscription program came back unbounded");
  Vec w = lp.x.head(k).cwiseMax(0.0);
  w /= w.sum();
  return {lp.x[k] / scale, w};
}

// Distance from the origin to the hull boundary: exact in one dimension,
// probed over random directions otherwise (the inscription LP along a unit
// direction returns exactly that direction's boundary distance).
inline double hull_boundary_distance(const Mat& phi, const Vec& pi, int probes = 64,
                                     std::uint64_t seed = 2024) {
  const int dim = int(phi.cols());
  if (dim == 1) {
    double lo = phi.col(0).minCoeff(), hi = phi.col(0).maxCoeff();
    if (lo >= 0.0 || hi <= 0.0) return 0.0;
    return std::min(-lo, hi);
  }
  Rng rng(seed);
  double best = std::numeric_limits<double>::infinity();
  for (int p = 0; p < probes + int(phi.rows()); ++p) {
    Vec dir = p < int(phi.rows()) ? Vec(phi.row(p).transpose()) : rng.gaussian_vec(dim);
    if (dir.norm() <= 1e-12) continue;
    dir /= dir.norm();
    auto [c, w] = max_inscribe_scale(dir, phi, pi);
    (void)w;
    best = std::min(best, c);
  }
  return best;
}

inline HullWeights hull_weights(const Mat& rows, const Mat& phi, const Vec& pi) {
  const int n = int(rows.rows());
  const int k = int(phi.rows());
  check_invariant((phi.transpose() * pi).norm() <= 1e-8, "NotCentered",
                  "community embeddings must average to zero under pi");

  HullWeights hw;
  hw.W = Mat::Zero(n, k);
  hw.scale = Vec::Zero(n);
  Mat witness(n, k);
  double cmin = std::numeric_limits<double>::infinity();
  for (int v = 0; v < n; ++v) {
    auto [cv, wv] = max_inscribe_scale(rows.row(v).transpose(), phi, pi);
    hw.scale[v] = cv;
    witness.row(v) = wv.transpose();
    if (std::isfinite(cv)) cmin = std::min(cmin, cv);
  }
  if (!std::isfinite(cmin)) cmin = 1.0;  // every row vanished; prior for everyone
  hw.c = std::min(cmin, 1e6 * std::sqrt(double(n)));
  check_invariant(hw.c > 1e-6, "DegenerateScale", "global inscription scale collapsed");

  for (int v = 0; v < n; ++v) {
    double a = std::isfinite(hw.scale[v]) ? hw.c / hw.scale[v] : 0.0;
    hw.W.row(v) = a * witness.row(v) + (1.0 - a) * pi.transpose();
    double resid = (phi.transpose() * hw.W.row(v).transpose() -
                    hw.c * rows.row(v).transpose())
                       .norm();
    check_invariant(resid <= 1e-7, "HullResidual", "interpolated weights left the ray");
    check_invariant(std::abs(hw.W.row(v).sum() - 1.0) <= 1e-9 && hw.W.row(v).minCoeff() >= -1e-9,
                    "NotSimplex", "rounded weights fell off the simplex");
  }
  return hw;
}

// One categorical draw per vertex, in index order, so a fixed seed yields the
// same labels on every platform.
inline Assignment sample_assignment(const HullWeights& hw, int k, Rng& rng) {
  Assignment a;
  a.k = k;
  const int n = int(hw.W.rows());
  a.labels.resize(n);
  for (int v = 0; v < n; ++v) {
    double u = rng.u01();
    double acc = 0.0;
    int pick = k - 1;
    for (int j = 0; j < k; ++j) {
      acc += std::max(0.0, hw.W(v, j));
      if (u < acc) {
        pick = j;
        break;
      }
    }
    a.labels[v] = pick;
  }
  return a;
}

inline RoundResult round_subspace(const Mat& U, const TransitionSpec& ts, const Vec& pi,
                                  std::uint64_t seed) {
  check_invariant(hull_boundary_distance(ts.phi, pi) > 1e-6, "HullDegenerate",
                  "origin is not safely interior to the embedding hull");
  Rng rng(seed);
  RoundResult out;
  out.embedding = random_subspace(U, ts.rprime, rng);
  out.weights = hull_weights(out.embedding.Y, ts.phi, pi);
  out.xhat = sample_assignment(out.weights, int(ts.phi.rows()), rng);
  return out;
}

}  // namespace bhrc
