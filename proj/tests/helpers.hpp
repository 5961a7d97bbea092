#pragma once

// Shared fixtures for the unit suite: canonical block models, tiny named
// graphs, and the desk-scale cap override that makes the trimming guard
// active at the sizes these tests can afford.

#include <string>
#include <utility>
#include <vector>

#include "bhrc/graphmat.hpp"
#include "bhrc/model.hpp"
#include "bhrc/rng.hpp"

namespace testutil {

// assortative two-community model, lambda2 = 0.6, signal 0.6^2*4 - 1 = 0.44
inline bhrc::ModelParams two_block() {
  bhrc::ModelParams mp;
  mp.k = 2;
  mp.d = 4.0;
  mp.M.resize(2, 2);
  mp.M << 1.6, 0.4, 0.4, 1.6;
  mp.pi = bhrc::Vec::Constant(2, 0.5);
  return mp;
}

// lambda2 = 0.4 at d = 4: signal 0.64 - 1 < 0, no workable parameters
inline bhrc::ModelParams below_ks() {
  bhrc::ModelParams mp;
  mp.k = 2;
  mp.d = 4.0;
  mp.M.resize(2, 2);
  mp.M << 1.4, 0.6, 0.6, 1.4;
  mp.pi = bhrc::Vec::Constant(2, 0.5);
  return mp;
}

// symmetric three-community model: transition spectrum {1, 0.4, 0.4},
// so the second eigenvalue has multiplicity two
inline bhrc::ModelParams three_block() {
  bhrc::ModelParams mp;
  mp.k = 3;
  mp.d = 3.0;
  mp.M.resize(3, 3);
  mp.M << 1.8, 0.6, 0.6, 0.6, 1.8, 0.6, 0.6, 0.6, 1.8;
  mp.pi = bhrc::Vec::Constant(3, 1.0 / 3.0);
  return mp;
}

// disassortative three-community model: transition spectrum {1, -0.5, -0.5},
// so rprime = r = 2 and the community embedding is a planar triangle
inline bhrc::ModelParams disassortative_three_block() {
  bhrc::ModelParams mp;
  mp.k = 3;
  mp.d = 10.0;
  mp.M.resize(3, 3);
  mp.M << 0.0, 1.5, 1.5, 1.5, 0.0, 1.5, 1.5, 1.5, 0.0;
  mp.pi = bhrc::Vec::Constant(3, 1.0 / 3.0);
  return mp;
}

inline double desk_kcap(const bhrc::ModelParams& mp) {
  return 2.0 * bhrc::select_parameters(mp).eta;
}

inline bhrc::AlgoParams desk_params(const bhrc::ModelParams& mp) {
  return bhrc::select_parameters(mp, {{"Kcap", desk_kcap(mp)}});
}

inline bhrc::SparseGraph path3() { return bhrc::make_graph(3, {{0, 1}, {1, 2}}); }

inline bhrc::SparseGraph triangle() {
  return bhrc::make_graph(3, {{0, 1}, {0, 2}, {1, 2}});
}

inline bhrc::SparseGraph cycle4() {
  return bhrc::make_graph(4, {{0, 1}, {1, 2}, {2, 3}, {0, 3}});
}

inline bhrc::SparseGraph single_edge() { return bhrc::make_graph(2, {{0, 1}}); }

inline bhrc::SparseGraph star(int leaves) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 1; i <= leaves; ++i) edges.push_back({0, i});
  return bhrc::make_graph(leaves + 1, edges);
}

inline bhrc::SparseGraph gnp(int n, double p, bhrc::Rng& rng) {
  std::vector<std::pair<int, int>> edges;
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (rng.u01() < p) edges.push_back({u, v});
  return bhrc::make_graph(n, edges);
}

// runs f and reports the structured error code it raises, "" if none
template <class F>
inline std::string error_code(F&& f) {
  try {
    f();
  } catch (const bhrc::error& e) {
    return e.code;
  }
  return "";
}

inline bhrc::Mat random_symmetric(int n, bhrc::Rng& rng) {
  bhrc::Mat a = rng.gaussian_mat(n, n);
  return 0.5 * (a + a.transpose());
}

}  // namespace testutil
