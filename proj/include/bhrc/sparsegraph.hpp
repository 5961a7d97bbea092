#pragma once

// Simple undirected graph: a canonical sorted edge list (u < v, unique, no
// loops) plus CSR adjacency built once at construction. Text form is a
// "n m" header line followed by one "u v" line per edge, 0-indexed.

#include <algorithm>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "common.hpp"

namespace bhrc {

struct SparseGraph {
  int n = 0;
  std::vector<std::pair<int, int>> edges;
  std::vector<int> indptr;
  std::vector<int> nbrs;
  Vec deg;

  int m() const { return int(edges.size()); }

  bool has_edge(int u, int v) const {
    if (u == v) return false;
    int lo = indptr[u], hi = indptr[u + 1];
    return std::binary_search(nbrs.begin() + lo, nbrs.begin() + hi, v);
  }

  // Index of undirected edge {u, v} in the sorted edge list, -1 if absent.
  int edge_index(int u, int v) const {
    if (u > v) std::swap(u, v);
    auto it = std::lower_bound(edges.begin(), edges.end(), std::make_pair(u, v));
    if (it == edges.end() || *it != std::make_pair(u, v)) return -1;
    return int(it - edges.begin());
  }

  SpMat adjacency() const {
    std::vector<Triplet> trips;
    trips.reserve(2 * edges.size());
    for (auto [u, v] : edges) {
      trips.emplace_back(u, v, 1.0);
      trips.emplace_back(v, u, 1.0);
    }
    SpMat A(n, n);
    A.setFromTriplets(trips.begin(), trips.end());
    A.makeCompressed();
    return A;
  }
};

inline SparseGraph make_graph(int n, std::vector<std::pair<int, int>> edges) {
  check_config(n >= 0, "BadDimension", "graph size must be nonnegative");
  for (auto& [u, v] : edges) {
    check_config(u >= 0 && u < n && v >= 0 && v < n, "BadEdge",
                 "edge endpoint out of range");
    check_config(u != v, "BadEdge", "self-loops are not allowed");
    if (u > v) std::swap(u, v);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  SparseGraph g;
  g.n = n;
  g.edges = std::move(edges);
  g.indptr.assign(n + 1, 0);
  for (auto [u, v] : g.edges) {
    g.indptr[u + 1] += 1;
    g.indptr[v + 1] += 1;
  }
  for (int i = 0; i < n; ++i) g.indptr[i + 1] += g.indptr[i];
  g.nbrs.resize(2 * g.edges.size());
  std::vector<int> cursor(g.indptr.begin(), g.indptr.end() - 1);
  for (auto [u, v] : g.edges) {
    g.nbrs[cursor[u]++] = v;
    g.nbrs[cursor[v]++] = u;
  }
  for (int i = 0; i < n; ++i)
    std::sort(g.nbrs.begin() + g.indptr[i], g.nbrs.begin() + g.indptr[i + 1]);
  g.deg.resize(n);
  for (int i = 0; i < n; ++i) g.deg[i] = double(g.indptr[i + 1] - g.indptr[i]);
  return g;
}

inline SparseGraph load_graph(std::istream& in) {
  int n = -1, m = -1;
  check_config(bool(in >> n >> m), "ParseError", "graph header must be 'n m'");
  std::vector<std::pair<int, int>> edges;
  edges.reserve(std::max(m, 0));
  for (int e = 0; e < m; ++e) {
    int u, v;
    check_config(bool(in >> u >> v), "ParseError", "graph edge line truncated");
    edges.emplace_back(u, v);
  }
  return make_graph(n, std::move(edges));
}

inline SparseGraph load_graph(const std::string& path) {
  std::ifstream f(path);
  check_config(f.good(), "ParseError", "cannot open graph file " + path);
  return load_graph(f);
}

inline void save_graph(const SparseGraph& g, std::ostream& out) {
  out << g.n << " " << g.m() << "\n";
  for (auto [u, v] : g.edges) out << u << " " << v << "\n";
}

inline void save_graph(const SparseGraph& g, const std::string& path) {
  std::ofstream f(path);
  check_config(f.good(), "ParseError", "cannot open output file " + path);
  save_graph(g, f);
}

}  // namespace bhrc
