#pragma once

// Edge corruption generators: uniform random flips, a planted dense subgraph
// on a small vertex set (hub), and monotone noise aligned with the planted
// partition. Every generator reports its exact edit list; applying a report
// to the original graph reproduces the corrupted one, and the symmetric
// difference distance always equals the budget.

#include <set>
#include <unordered_set>

#include "common.hpp"
#include "model.hpp"
#include "rng.hpp"
#include "sparsegraph.hpp"

namespace bhrc {

struct Edit {
  int u = 0, v = 0;
  bool insert = true;
};

struct CorruptionReport {
  std::vector<Edit> edits;
  int budget_used = 0;
  std::vector<int> touched;  // sorted distinct endpoints

  void finalize() {
    budget_used = int(edits.size());
    std::set<int> t;
    for (const Edit& e : edits) {
      t.insert(e.u);
      t.insert(e.v);
    }
    touched.assign(t.begin(), t.end());
  }

  void write(std::ostream& out) const {
    for (const Edit& e : edits)
      out << (e.insert ? "+ " : "- ") << e.u << " " << e.v << "\n";
  }

  static CorruptionReport parse(std::istream& in) {
    CorruptionReport rep;
    std::string op;
    int u, v;
    while (in >> op >> u >> v) {
      check_config(op == "+" || op == "-", "ParseError",
                   "corruption line must start with + or -");
      rep.edits.push_back({u, v, op == "+"});
    }
    rep.finalize();
    return rep;
  }
};

inline SparseGraph apply_report(const SparseGraph& g, const CorruptionReport& rep) {
  std::set<std::pair<int, int>> es(g.edges.begin(), g.edges.end());
  for (const Edit& e : rep.edits) {
    auto key = std::minmax(e.u, e.v);
    std::pair<int, int> p{key.first, key.second};
    if (e.insert) {
      check_config(!es.count(p), "BadEdge", "report inserts an existing edge");
      es.insert(p);
    } else {
      check_config(es.count(p) > 0, "BadEdge", "report deletes a missing edge");
      es.erase(p);
    }
  }
  return make_graph(g.n, std::vector<std::pair<int, int>>(es.begin(), es.end()));
}

// budget distinct pairs chosen uniformly, each flipped. Applying the report
// with every edit sign inverted restores the original graph.
inline std::pair<SparseGraph, CorruptionReport> corrupt_random(const SparseGraph& g,
                                                               int budget,
                                                               std::uint64_t seed) {
  std::int64_t npairs = std::int64_t(g.n) * (g.n - 1) / 2;
  check_config(budget >= 0 && budget <= npairs, "BudgetTooSmall",
               "budget must lie in [0, n(n-1)/2]");
  Rng rng(seed);
  std::set<std::pair<int, int>> chosen;
  CorruptionReport rep;
  while (int(chosen.size()) < budget) {
    int u = rng.index(g.n), v = rng.index(g.n);
    if (u == v) continue;
    if (u > v) std::swap(u, v);
    if (!chosen.insert({u, v}).second) continue;
    rep.edits.push_back({u, v, !g.has_edge(u, v)});
  }
  rep.finalize();
  return {apply_report(g, rep), rep};
}

// Insert exactly budget edges forming a near-clique on ceil(sqrt(2 budget))
// random vertices, growing the vertex pool when the pool's non-edges run out.
inline std::pair<SparseGraph, CorruptionReport> corrupt_hub(const SparseGraph& g,
                                                            int budget,
                                                            std::uint64_t seed) {
  check_config(budget >= 3, "BudgetTooSmall", "hub corruption needs budget >= 3");
  Rng rng(seed + 777);
  int q = int(std::ceil(std::sqrt(2.0 * budget)));
  std::set<std::pair<int, int>> added;
  CorruptionReport rep;
  for (int tries = 0; int(rep.edits.size()) < budget && tries < 50; ++tries) {
    int want = std::min(g.n, q + tries);
    std::vector<int> verts = rng.distinct(g.n, want);
    std::vector<std::pair<int, int>> pairs;
    for (std::size_t i = 0; i < verts.size(); ++i)
      for (std::size_t j = i + 1; j < verts.size(); ++j) {
        int u = verts[i], v = verts[j];
        if (u > v) std::swap(u, v);
        pairs.emplace_back(u, v);
      }
    rng.shuffle(pairs);
    for (auto [u, v] : pairs) {
      if (int(rep.edits.size()) >= budget) break;
      if (g.has_edge(u, v) || added.count({u, v})) continue;
      added.insert({u, v});
      rep.edits.push_back({u, v, true});
    }
  }
  check_invariant(int(rep.edits.size()) == budget, "BudgetTooSmall",
                  "could not place the full hub budget");
  rep.finalize();
  return {apply_report(g, rep), rep};
}

// Monotone noise: intra-community insertions and inter-community deletions,
// exactly budget edits total, split as evenly as the pools allow.
inline std::pair<SparseGraph, CorruptionReport> corrupt_monotone(const SparseGraph& g,
                                                                 const Assignment& x,
                                                                 int budget,
                                                                 std::uint64_t seed) {
  check_config(x.n() == g.n, "SizeMismatch", "assignment size must match the graph");
  check_config(budget >= 0, "BudgetTooSmall", "budget must be nonnegative");
  Rng rng(seed);

  std::vector<std::pair<int, int>> inter;
  for (auto [u, v] : g.edges)
    if (x.labels[u] != x.labels[v]) inter.emplace_back(u, v);

  // Count intra non-edges exactly so pool exhaustion is detected honestly.
  std::vector<std::int64_t> csize;
  for (int c : x.counts()) csize.push_back(c);
  std::int64_t intra_pairs = 0;
  for (std::int64_t c : csize) intra_pairs += c * (c - 1) / 2;
  std::int64_t intra_edges = 0;
  for (auto [u, v] : g.edges)
    if (x.labels[u] == x.labels[v]) intra_edges += 1;
  std::int64_t insert_pool = intra_pairs - intra_edges;

  std::int64_t want_ins = (budget + 1) / 2;
  std::int64_t want_del = budget / 2;
  if (want_del > std::int64_t(inter.size())) {
    want_ins += want_del - std::int64_t(inter.size());
    want_del = std::int64_t(inter.size());
  }
  if (want_ins > insert_pool) {
    std::int64_t deficit = want_ins - insert_pool;
    want_ins = insert_pool;
    want_del += deficit;
    check_config(want_del <= std::int64_t(inter.size()), "ExhaustedMoves",
                 "not enough legal monotone moves for the budget");
  }

  CorruptionReport rep;
  rng.shuffle(inter);
  for (int i = 0; i < want_del; ++i)
    rep.edits.push_back({inter[i].first, inter[i].second, false});

  // Group vertices per community for uniform intra-pair rejection sampling.
  std::vector<std::vector<int>> members(x.k);
  for (int v = 0; v < g.n; ++v) members[x.labels[v]].push_back(v);
  Vec comm_pairs(x.k);
  for (int c = 0; c < x.k; ++c) {
    double s = double(members[c].size());
    comm_pairs[c] = s * (s - 1.0) / 2.0;
  }
  std::set<std::pair<int, int>> added;
  std::int64_t placed = 0;
  std::int64_t attempts = 0, attempt_cap = 200 * (want_ins + 10);
  while (placed < want_ins && attempts < attempt_cap) {
    attempts += 1;
    int c = rng.discrete(comm_pairs);
    const auto& mem = members[c];
    int a = mem[rng.index(int(mem.size()))];
    int b = mem[rng.index(int(mem.size()))];
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    if (g.has_edge(a, b) || added.count({a, b})) continue;
    added.insert({a, b});
    rep.edits.push_back({a, b, true});
    placed += 1;
  }
  if (placed < want_ins) {
    // Rejection stalled (dense community); enumerate the remaining pool.
    std::vector<std::pair<int, int>> pool;
    for (int c = 0; c < x.k; ++c)
      for (std::size_t i = 0; i < members[c].size(); ++i)
        for (std::size_t j = i + 1; j < members[c].size(); ++j) {
          int a = members[c][i], b = members[c][j];
          if (a > b) std::swap(a, b);
          if (!g.has_edge(a, b) && !added.count({a, b})) pool.emplace_back(a, b);
        }
    rng.shuffle(pool);
    check_config(std::int64_t(pool.size()) >= want_ins - placed, "ExhaustedMoves",
                 "intra-community insertion pool exhausted");
    for (std::int64_t i = 0; placed < want_ins; ++i, ++placed)
      rep.edits.push_back({pool[i].first, pool[i].second, true});
  }

  rep.finalize();
  return {apply_report(g, rep), rep};
}

// Size of the symmetric difference of the edge sets.
inline int corruption_distance(const SparseGraph& a, const SparseGraph& b) {
  check_config(a.n == b.n, "SizeMismatch", "graphs must have the same vertex count");
  std::size_t i = 0, j = 0;
  int diff = 0;
  while (i < a.edges.size() && j < b.edges.size()) {
    if (a.edges[i] == b.edges[j]) {
      ++i;
      ++j;
    } else if (a.edges[i] < b.edges[j]) {
      ++diff;
      ++i;
    } else {
      ++diff;
      ++j;
    }
  }
  diff += int(a.edges.size() - i) + int(b.edges.size() - j);
  return diff;
}

}  // namespace bhrc
