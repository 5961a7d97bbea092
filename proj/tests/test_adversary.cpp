#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include <bhrc/adversary.hpp>

#include "helpers.hpp"

using bhrc::Mat;
using bhrc::SparseGraph;
using bhrc::Vec;
using testutil::error_code;

namespace {

bhrc::CorruptionReport inverted(const bhrc::CorruptionReport& rep) {
  bhrc::CorruptionReport inv;
  for (const bhrc::Edit& e : rep.edits) inv.edits.push_back({e.u, e.v, !e.insert});
  inv.finalize();
  return inv;
}

}  // namespace

TEST_CASE("random corruption flips exactly the budget", "[adversary]") {
  bhrc::Rng rng(11);
  SparseGraph g = testutil::gnp(60, 0.15, rng);
  for (int budget : {0, 5, 25}) {
    auto [bad, rep] = bhrc::corrupt_random(g, budget, 7);
    REQUIRE(rep.budget_used == budget);
    REQUIRE(int(rep.edits.size()) == budget);
    REQUIRE(bhrc::corruption_distance(g, bad) == budget);
    // the edit list is consistent with the input graph
    for (const bhrc::Edit& e : rep.edits)
      REQUIRE(g.has_edge(e.u, e.v) == !e.insert);
    // undo by applying the sign-inverted report
    SparseGraph back = bhrc::apply_report(bad, inverted(rep));
    REQUIRE(back.edges == g.edges);
  }

  auto [bad1, rep1] = bhrc::corrupt_random(g, 12, 99);
  auto [bad2, rep2] = bhrc::corrupt_random(g, 12, 99);
  REQUIRE(bad1.edges == bad2.edges);
  auto [bad3, rep3] = bhrc::corrupt_random(g, 12, 100);
  REQUIRE(bad1.edges != bad3.edges);
}

TEST_CASE("random corruption budget bounds", "[adversary]") {
  bhrc::Rng rng(13);
  SparseGraph g = testutil::gnp(10, 0.3, rng);
  REQUIRE(error_code([&] { bhrc::corrupt_random(g, -1, 5); }) == "BudgetTooSmall");
  REQUIRE(error_code([&] { bhrc::corrupt_random(g, 46, 5); }) == "BudgetTooSmall");

  // the full pair budget flips every pair: the result is the complement
  auto [bad, rep] = bhrc::corrupt_random(g, 45, 5);
  REQUIRE(rep.budget_used == 45);
  for (int u = 0; u < 10; ++u)
    for (int v = u + 1; v < 10; ++v)
      REQUIRE(bad.has_edge(u, v) == !g.has_edge(u, v));
}

TEST_CASE("hub corruption plants a near-clique", "[adversary]") {
  SparseGraph empty = bhrc::make_graph(100, {});

  auto [tri, trep] = bhrc::corrupt_hub(empty, 3, 21);
  REQUIRE(trep.budget_used == 3);
  REQUIRE(trep.touched.size() == 3);
  for (int v : trep.touched) REQUIRE(tri.deg[v] == 2.0);

  auto [bad, rep] = bhrc::corrupt_hub(empty, 45, 4);
  REQUIRE(rep.budget_used == 45);
  REQUIRE(bhrc::corruption_distance(empty, bad) == 45);
  REQUIRE(rep.touched.size() == 10);
  for (const bhrc::Edit& e : rep.edits) REQUIRE(e.insert);
  // 45 insertions on 10 vertices is the complete graph on them
  for (std::size_t i = 0; i < rep.touched.size(); ++i)
    for (std::size_t j = i + 1; j < rep.touched.size(); ++j)
      REQUIRE(bad.has_edge(rep.touched[i], rep.touched[j]));
}

TEST_CASE("hub corruption avoids existing edges", "[adversary]") {
  bhrc::Rng rng(31);
  SparseGraph g = testutil::gnp(40, 0.25, rng);
  auto [bad, rep] = bhrc::corrupt_hub(g, 20, 8);
  REQUIRE(rep.budget_used == 20);
  REQUIRE(bhrc::corruption_distance(g, bad) == 20);
  for (const bhrc::Edit& e : rep.edits) {
    REQUIRE(e.insert);
    REQUIRE(!g.has_edge(e.u, e.v));
  }
  auto [bad2, rep2] = bhrc::corrupt_hub(g, 20, 8);
  REQUIRE(bad.edges == bad2.edges);

  REQUIRE(error_code([&] { bhrc::corrupt_hub(g, 2, 8); }) == "BudgetTooSmall");
}

TEST_CASE("monotone noise only helps the planted partition", "[adversary]") {
  bhrc::Rng rng(41);
  SparseGraph g = testutil::gnp(40, 0.2, rng);
  bhrc::Assignment x{2, {}};
  for (int v = 0; v < 40; ++v) x.labels.push_back(v % 2);

  auto [bad, rep] = bhrc::corrupt_monotone(g, x, 11, 3);
  REQUIRE(rep.budget_used == 11);
  REQUIRE(bhrc::corruption_distance(g, bad) == 11);
  int ins = 0, del = 0;
  for (const bhrc::Edit& e : rep.edits) {
    if (e.insert) {
      REQUIRE(x.labels[e.u] == x.labels[e.v]);
      REQUIRE(!g.has_edge(e.u, e.v));
      ins += 1;
    } else {
      REQUIRE(x.labels[e.u] != x.labels[e.v]);
      REQUIRE(g.has_edge(e.u, e.v));
      del += 1;
    }
  }
  REQUIRE(ins == 6);
  REQUIRE(del == 5);

  auto [bad2, rep2] = bhrc::corrupt_monotone(g, x, 11, 3);
  REQUIRE(bad.edges == bad2.edges);
}

TEST_CASE("monotone noise shifts stranded deletions into insertions", "[adversary]") {
  // no inter-community edges at all: the whole budget must become insertions
  SparseGraph g = bhrc::make_graph(10, {});
  bhrc::Assignment x{2, {0, 0, 0, 0, 0, 1, 1, 1, 1, 1}};
  auto [bad, rep] = bhrc::corrupt_monotone(g, x, 7, 17);
  REQUIRE(rep.budget_used == 7);
  for (const bhrc::Edit& e : rep.edits) {
    REQUIRE(e.insert);
    REQUIRE(x.labels[e.u] == x.labels[e.v]);
  }
}

TEST_CASE("monotone noise reports pool exhaustion", "[adversary]") {
  // complete graph on 4 vertices: no intra insertions possible, only the 4
  // inter edges can go, so a budget of 9 cannot be met
  SparseGraph g = bhrc::make_graph(
      4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}});
  bhrc::Assignment x{2, {0, 0, 1, 1}};
  REQUIRE(error_code([&] { bhrc::corrupt_monotone(g, x, 9, 5); }) ==
          "ExhaustedMoves");

  // budget 4 fits: 2 insertions impossible -> all 4 deletions instead... but
  // want_ins = 2 > pool 0 pushes both onto deletions, which the 4 inter edges cover
  auto [bad, rep] = bhrc::corrupt_monotone(g, x, 4, 5);
  REQUIRE(rep.budget_used == 4);
  for (const bhrc::Edit& e : rep.edits) REQUIRE(!e.insert);

  bhrc::Assignment wrong{2, {0, 1, 0}};
  REQUIRE(error_code([&] { bhrc::corrupt_monotone(g, wrong, 2, 5); }) ==
          "SizeMismatch");
}

TEST_CASE("corruption reports survive a text round trip", "[adversary]") {
  bhrc::Rng rng(51);
  SparseGraph g = testutil::gnp(30, 0.2, rng);
  auto [bad, rep] = bhrc::corrupt_random(g, 9, 77);

  std::ostringstream out;
  rep.write(out);
  std::istringstream in(out.str());
  bhrc::CorruptionReport back = bhrc::CorruptionReport::parse(in);

  REQUIRE(back.budget_used == rep.budget_used);
  REQUIRE(back.touched == rep.touched);
  REQUIRE(back.edits.size() == rep.edits.size());
  for (std::size_t i = 0; i < rep.edits.size(); ++i) {
    REQUIRE(back.edits[i].u == rep.edits[i].u);
    REQUIRE(back.edits[i].v == rep.edits[i].v);
    REQUIRE(back.edits[i].insert == rep.edits[i].insert);
  }
  SparseGraph replayed = bhrc::apply_report(g, back);
  REQUIRE(replayed.edges == bad.edges);

  std::istringstream junk("x 1 2\n");
  REQUIRE(error_code([&] { bhrc::CorruptionReport::parse(junk); }) == "ParseError");
}

TEST_CASE("applying an inconsistent report fails", "[adversary]") {
  SparseGraph g = testutil::triangle();
  bhrc::CorruptionReport ins_existing;
  ins_existing.edits.push_back({0, 1, true});
  ins_existing.finalize();
  REQUIRE(error_code([&] { bhrc::apply_report(g, ins_existing); }) == "BadEdge");

  bhrc::CorruptionReport del_missing;
  del_missing.edits.push_back({0, 1, false});
  del_missing.finalize();
  SparseGraph p = testutil::path3();
  REQUIRE(error_code([&] {
            bhrc::CorruptionReport r;
            r.edits.push_back({0, 2, false});
            r.finalize();
            bhrc::apply_report(p, r);
          }) == "BadEdge");
}

TEST_CASE("symmetric difference distance", "[adversary]") {
  SparseGraph tri = testutil::triangle();
  SparseGraph p3 = testutil::path3();
  REQUIRE(bhrc::corruption_distance(tri, tri) == 0);
  REQUIRE(bhrc::corruption_distance(tri, p3) == 1);
  REQUIRE(bhrc::corruption_distance(p3, tri) == 1);
  REQUIRE(bhrc::corruption_distance(tri, bhrc::make_graph(3, {})) == 3);
  REQUIRE(error_code([&] {
            bhrc::corruption_distance(tri, testutil::cycle4());
          }) == "SizeMismatch");
}
