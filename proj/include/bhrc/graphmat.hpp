#pragma once

// Matrix constructions over a graph: degree truncation, the Bethe-Hessian in
// standard and truncated form, the nonbacktracking edge matrix, polynomial
// powers A^(l) counting nonbacktracking walks (explicit, matrix-free, and a
// walk-enumeration oracle), the sandwich M = A^(l) H A^(l), and lifts of
// community vectors.

#include <unordered_set>

#include "common.hpp"
#include "model.hpp"
#include "sparsegraph.hpp"

namespace bhrc {

struct TruncationResult {
  SparseGraph graph;     // every edge with an endpoint of degree > B removed
  Vec dbar;              // degrees (pre- or post-truncation), zeroed where degree > B
  std::vector<int> affected;  // endpoints of removed edges
};

// dbar defaults to the pre-truncation degree of every kept vertex, so a
// vertex losing edges to a heavy neighbor still counts them; pass
// post_degrees to read degrees off the truncated graph instead. Vertices
// over the cap read zero either way.
inline TruncationResult truncate(const SparseGraph& g, int B, bool post_degrees = false) {
  check_config(B >= 0, "BadDimension", "degree cap must be nonnegative");
  TruncationResult tr;

  std::vector<std::pair<int, int>> kept;
  kept.reserve(g.edges.size());
  std::vector<char> touched(g.n, 0);
  for (auto [u, v] : g.edges) {
    if (g.deg[u] <= double(B) && g.deg[v] <= double(B)) {
      kept.emplace_back(u, v);
    } else {
      touched[u] = 1;
      touched[v] = 1;
    }
  }
  tr.graph = make_graph(g.n, std::move(kept));
  tr.dbar.resize(g.n);
  for (int v = 0; v < g.n; ++v) {
    double dv = post_degrees ? tr.graph.deg[v] : g.deg[v];
    tr.dbar[v] = g.deg[v] <= double(B) ? dv : 0.0;
  }
  for (int v = 0; v < g.n; ++v)
    if (touched[v]) tr.affected.push_back(v);
  return tr;
}

// H(t) = (D - I) t^2 - A t + I on the given graph.
inline SpMat bethe_hessian(const SparseGraph& g, double t) {
  std::vector<Triplet> trips;
  trips.reserve(2 * g.edges.size() + g.n);
  for (auto [u, v] : g.edges) {
    trips.emplace_back(u, v, -t);
    trips.emplace_back(v, u, -t);
  }
  for (int v = 0; v < g.n; ++v)
    trips.emplace_back(v, v, 1.0 + t * t * (g.deg[v] - 1.0));
  SpMat H(g.n, g.n);
  H.setFromTriplets(trips.begin(), trips.end());
  H.makeCompressed();
  return H;
}

// Truncated variant: adjacency of the truncated graph, diagonal from the
// pre-truncation degrees (zeroed above the cap).
inline SpMat bethe_hessian_truncated(const TruncationResult& tr, double t) {
  const SparseGraph& g = tr.graph;
  std::vector<Triplet> trips;
  trips.reserve(2 * g.edges.size() + g.n);
  for (auto [u, v] : g.edges) {
    trips.emplace_back(u, v, -t);
    trips.emplace_back(v, u, -t);
  }
  for (int v = 0; v < g.n; ++v)
    trips.emplace_back(v, v, 1.0 + t * t * (tr.dbar[v] - 1.0));
  SpMat H(g.n, g.n);
  H.setFromTriplets(trips.begin(), trips.end());
  H.makeCompressed();
  return H;
}

struct NbMatrix {
  int n = 0;
  // Directed edge 2e is (u -> v) and 2e+1 is (v -> u) for undirected edge e.
  std::vector<std::pair<int, int>> dir_edges;
  SpMat B;
};

inline NbMatrix nb_matrix(const SparseGraph& g) {
  NbMatrix nb;
  nb.n = g.n;
  nb.dir_edges.reserve(2 * g.edges.size());
  for (auto [u, v] : g.edges) {
    nb.dir_edges.emplace_back(u, v);
    nb.dir_edges.emplace_back(v, u);
  }
  auto dir_id = [&](int u, int v) {
    int e = g.edge_index(u, v);
    return 2 * e + (u > v ? 1 : 0);
  };
  std::vector<Triplet> trips;
  for (int row = 0; row < int(nb.dir_edges.size()); ++row) {
    auto [u, v] = nb.dir_edges[row];
    for (int j = g.indptr[v]; j < g.indptr[v + 1]; ++j) {
      int w = g.nbrs[j];
      if (w == u) continue;
      trips.emplace_back(row, dir_id(v, w), 1.0);
    }
  }
  nb.B.resize(int(nb.dir_edges.size()), int(nb.dir_edges.size()));
  nb.B.setFromTriplets(trips.begin(), trips.end());
  nb.B.makeCompressed();
  return nb;
}

namespace detail {

inline void drop_small(SpMat& A, double tol = 1e-14) {
  A.prune([tol](int, int, double v) { return std::abs(v) > tol; });
  A.makeCompressed();
}

}  // namespace detail

// A^(l): entries count nonbacktracking walks of length l. Recurrence
// A^(0) = I, A^(1) = A, A^(2) = A^2 - D, and for l >= 3
// A^(l) = A A^(l-1) - (D - I) A^(l-2), with D the degree diagonal of the
// graph the powers are taken over.
inline SpMat nb_power(const SparseGraph& g, int ell) {
  check_config(ell >= 0, "BadDimension", "walk length must be nonnegative");
  SpMat I(g.n, g.n);
  I.setIdentity();
  if (ell == 0) return I;
  SpMat A = g.adjacency();
  if (ell == 1) return A;

  SpMat D(g.n, g.n), Dm1(g.n, g.n);
  std::vector<Triplet> dt, dt1;
  for (int v = 0; v < g.n; ++v) {
    dt.emplace_back(v, v, g.deg[v]);
    dt1.emplace_back(v, v, g.deg[v] - 1.0);
  }
  D.setFromTriplets(dt.begin(), dt.end());
  Dm1.setFromTriplets(dt1.begin(), dt1.end());

  SpMat prev = A;
  SpMat cur = (A * A - D).eval();
  detail::drop_small(cur);
  for (int j = 3; j <= ell; ++j) {
    SpMat nxt = (A * cur - Dm1 * prev).eval();
    detail::drop_small(nxt);
    prev.swap(cur);
    cur.swap(nxt);
  }
  return cur;
}

// Direct enumeration of nonbacktracking walks; the independent oracle for
// nb_power on small graphs.
inline Mat nb_power_oracle(const SparseGraph& g, int ell) {
  check_config(g.n <= 50 && ell <= 6, "OracleTooLarge",
               "walk enumeration is limited to n <= 50, l <= 6");
  Mat Z = Mat::Zero(g.n, g.n);
  if (ell == 0) {
    for (int v = 0; v < g.n; ++v) Z(v, v) = 1.0;
    return Z;
  }
  struct Frame {
    int prev, cur, len;
  };
  for (int s = 0; s < g.n; ++s) {
    std::vector<Frame> stack;
    for (int j = g.indptr[s]; j < g.indptr[s + 1]; ++j)
      stack.push_back({s, g.nbrs[j], 1});
    while (!stack.empty()) {
      Frame f = stack.back();
      stack.pop_back();
      if (f.len == ell) {
        Z(s, f.cur) += 1.0;
        continue;
      }
      for (int j = g.indptr[f.cur]; j < g.indptr[f.cur + 1]; ++j) {
        int w = g.nbrs[j];
        if (w == f.prev) continue;
        stack.push_back({f.cur, w, f.len + 1});
      }
    }
  }
  return Z;
}

// Matrix-free application of A^(l) over a fixed graph.
struct NbPowerApplier {
  SpMat A;
  Vec deg;
  int ell = 0;

  NbPowerApplier() = default;
  NbPowerApplier(const SparseGraph& g, int l) : A(g.adjacency()), deg(g.deg), ell(l) {}

  Mat apply(const Mat& X) const {
    if (ell == 0) return X;
    Mat prev = X;
    Mat cur = A * X;
    for (int j = 2; j <= ell; ++j) {
      Mat nxt;
      if (j == 2)
        nxt = A * cur - deg.asDiagonal() * prev;
      else
        nxt = A * cur - (deg.array() - 1.0).matrix().asDiagonal() * prev;
      prev.swap(cur);
      cur.swap(nxt);
    }
    return cur;
  }

  Vec apply(const Vec& x) const {
    Mat X = apply(Mat(x));
    return X.col(0);
  }
};

// M = A^(l) H A^(l) with A^(l) over g and H any symmetric n x n matrix.
// Built through dense intermediates (the powers fill in long before l = 7)
// and symmetrized exactly before conversion back to sparse.
inline SpMat m_matrix(const SparseGraph& g, const SpMat& H, int ell) {
  check_config(g.n <= 8000, "MatrixTooLarge",
               "explicit sandwich limited to n <= 8000; use the operator form");
  check_config(H.rows() == g.n && H.cols() == g.n, "BadDimension",
               "H must match the graph size");
  NbPowerApplier ap(g, ell);
  Mat M;
  {
    Mat Z = ap.apply(Mat(Mat::Identity(g.n, g.n)));
    Mat W = H * Z;
    M = Z.transpose() * W;
  }
  M = 0.5 * (M + M.transpose()).eval();
  SpMat out = M.sparseView(1.0, 1e-14);
  out.makeCompressed();
  return out;
}

inline SpMat m_matrix(const TruncationResult& tr, int ell, double t) {
  return m_matrix(tr.graph, bethe_hessian_truncated(tr, t), ell);
}

// Lift a per-community vector f to a per-vertex vector: out_v = f(x_v).
inline Vec lift_vector(const Vec& f, const Assignment& x) {
  check_config(f.size() == x.k, "BadDimension", "lift needs one value per community");
  Vec out(x.n());
  for (int v = 0; v < x.n(); ++v) out[v] = f[x.labels[v]];
  return out;
}

// Centered community indicator lift: 1{x_v = c} - 1/k.
inline Vec centered_indicator(const Assignment& x, int community) {
  Vec f = Vec::Constant(x.k, -1.0 / x.k);
  f[community] += 1.0;
  return lift_vector(f, x);
}

}  // namespace bhrc
