#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>

#include <bhrc/harness.hpp>

#include "helpers.hpp"

using bhrc::json;
using bhrc::Mat;
using bhrc::Vec;
using testutil::error_code;

namespace {

json desk_json(int n, std::vector<std::uint64_t> seeds) {
  json j;
  j["model"] = {{"k", 2},
                {"d", 4.0},
                {"pi", {0.5, 0.5}},
                {"M", {{1.6, 0.4}, {0.4, 1.6}}}};
  j["n"] = n;
  j["seeds"] = seeds;
  return j;
}

}  // namespace

TEST_CASE("config parsing covers the layout variants", "[harness]") {
  json nested = desk_json(500, {1, 2});
  nested["adversary"] = {{"kind", "hub"}, {"delta", 0.002}};
  nested["overrides"] = {{"Kcap", 0.5}};
  nested["eps_star"] = 0.2;
  nested["outputs"] = {{"prefix", "runs/demo"}};
  nested["inputs"] = {{"report", "fixtures/report.txt"}};

  bhrc::ExperimentConfig cfg = bhrc::parse_config(nested);
  REQUIRE(cfg.n == 500);
  REQUIRE(cfg.model.k == 2);
  REQUIRE(cfg.model.d == 4.0);
  REQUIRE(cfg.seeds == std::vector<std::uint64_t>{1, 2});
  REQUIRE(cfg.adversary.kind == "hub");
  REQUIRE(cfg.adversary.delta == 0.002);
  REQUIRE(cfg.overrides.at("Kcap") == 0.5);
  REQUIRE(cfg.eps_star == 0.2);
  REQUIRE(!cfg.allow_below_ks);
  REQUIRE(cfg.out_prefix == "runs/demo");
  REQUIRE(cfg.inputs.at("report") == "fixtures/report.txt");

  // the model block may also sit at the top level
  json flat;
  flat["k"] = 2;
  flat["d"] = 4.0;
  flat["pi"] = {0.5, 0.5};
  flat["M"] = {{1.6, 0.4}, {0.4, 1.6}};
  flat["n"] = 100;
  flat["seeds"] = {9};
  bhrc::ExperimentConfig fcfg = bhrc::parse_config(flat);
  REQUIRE(fcfg.model.d == 4.0);
  REQUIRE(fcfg.adversary.kind == "none");
  REQUIRE(fcfg.eps_star == 0.1);
}

TEST_CASE("config parsing loads a model file", "[harness]") {
  const char* path = "/tmp/bhrc_model_test.txt";
  {
    std::ofstream out(path);
    out << "# desk model\n";
    out << "k 2\n";
    out << "d 4\n";
    out << "pi 0.5 0.5\n";
    out << "M\n";
    out << "1.6 0.4\n";
    out << "0.4 1.6\n";
  }
  json j;
  j["model_file"] = path;
  j["n"] = 64;
  j["seeds"] = {4};
  bhrc::ExperimentConfig cfg = bhrc::parse_config(j);
  REQUIRE(cfg.model.k == 2);
  REQUIRE(cfg.model.M(0, 0) == 1.6);
  std::remove(path);

  REQUIRE(error_code([] { bhrc::load_config("/tmp/definitely_missing.json"); }) ==
          "MissingFile");
}

TEST_CASE("config parsing rejects bad inputs", "[harness]") {
  json no_seeds = desk_json(100, {});
  REQUIRE(error_code([&] { bhrc::parse_config(no_seeds); }) == "NoSeeds");

  json bad_kind = desk_json(100, {1});
  bad_kind["adversary"] = {{"kind", "zap"}};
  REQUIRE(error_code([&] { bhrc::parse_config(bad_kind); }) == "BadAdversary");

  json bad_delta = desk_json(100, {1});
  bad_delta["adversary"] = {{"kind", "random"}, {"delta", -0.5}};
  REQUIRE(error_code([&] { bhrc::parse_config(bad_delta); }) == "BadAdversary");

  json bad_m = desk_json(100, {1});
  bad_m["model"]["M"] = {{1.6, 0.4}};
  REQUIRE(error_code([&] { bhrc::parse_config(bad_m); }) == "BadDimension");

  json bad_n = desk_json(0, {1});
  REQUIRE(error_code([&] { bhrc::parse_config(bad_n); }) == "BadDimension");
}

TEST_CASE("config hashing is canonical", "[harness]") {
  json a = desk_json(500, {1, 2});
  json b = desk_json(500, {1, 2});
  REQUIRE(bhrc::config_hash(bhrc::parse_config(a)) ==
          bhrc::config_hash(bhrc::parse_config(b)));
  json c = desk_json(500, {1, 3});
  REQUIRE(bhrc::config_hash(bhrc::parse_config(a)) !=
          bhrc::config_hash(bhrc::parse_config(c)));
}

TEST_CASE("pipeline refuses models without detectable signal", "[harness]") {
  json j;
  j["model"] = {{"k", 2},
                {"d", 4.0},
                {"pi", {0.5, 0.5}},
                {"M", {{1.4, 0.6}, {0.6, 1.4}}}};
  j["n"] = 100;
  j["seeds"] = {1};
  bhrc::ExperimentConfig cfg = bhrc::parse_config(j);
  REQUIRE(error_code([&] { bhrc::run_pipeline(cfg); }) == "BelowKestenStigum");

  // with the flag and explicit parameters the run proceeds, recording
  // per-seed outcomes instead of refusing
  j["allow_below_ks"] = true;
  j["overrides"] = {{"ell", 2.0}, {"delta_t", 0.16}, {"upsilon", 0.5}};
  bhrc::ExperimentConfig forced = bhrc::parse_config(j);
  std::vector<bhrc::RunRecord> recs = bhrc::run_pipeline(forced);
  REQUIRE(recs.size() == 1);
}

TEST_CASE("pipeline runs are bit reproducible", "[harness]") {
  bhrc::ExperimentConfig cfg = bhrc::parse_config(desk_json(400, {1, 2}));
  std::vector<bhrc::RunRecord> first = bhrc::run_pipeline(cfg);
  std::vector<bhrc::RunRecord> second = bhrc::run_pipeline(cfg);
  REQUIRE(first.size() == 2);
  REQUIRE(second.size() == 2);
  for (std::size_t i = 0; i < first.size(); ++i) {
    REQUIRE(first[i].seed == cfg.seeds[i]);
    REQUIRE(bhrc::record_hash(first[i]) == bhrc::record_hash(second[i]));
    REQUIRE(first[i].cfg_hash == second[i].cfg_hash);
  }
}

TEST_CASE("pipeline records sane fields on a clean run", "[harness]") {
  bhrc::ExperimentConfig cfg = bhrc::parse_config(desk_json(400, {3}));
  std::vector<bhrc::RunRecord> recs = bhrc::run_pipeline(cfg);
  REQUIRE(recs.size() == 1);
  const bhrc::RunRecord& r = recs[0];
  INFO("error: " << r.error);
  REQUIRE(r.error.empty());
  REQUIRE(r.certified);
  REQUIRE(r.dim_u >= 1);
  REQUIRE(r.rho >= 0.0);
  REQUIRE(r.rho <= 1.0);
  REQUIRE(r.c_over_sqrt_n > 0.0);
  REQUIRE(r.witness >= 0.0);
  REQUIRE(r.witness <= 1.0 + 1e-9);
  REQUIRE(r.advantage >= 0.0);
  REQUIRE(r.mi_per_vertex >= 0.0);
  REQUIRE(r.phi_first >= r.phi_final);
  REQUIRE(r.trim_steps >= 0);
  REQUIRE(r.max_diag > 0.0);
  REQUIRE(r.wall_ms > 0.0);
}

TEST_CASE("per seed failures are recorded without stopping the sweep", "[harness]") {
  json j = desk_json(300, {1, 2, 3});
  // an absurd detection margin leaves nothing below the threshold
  j["overrides"] = {{"upsilon", 1e15}};
  bhrc::ExperimentConfig cfg = bhrc::parse_config(j);
  std::vector<bhrc::RunRecord> recs = bhrc::run_pipeline(cfg);
  REQUIRE(recs.size() == 3);
  for (const auto& r : recs) {
    REQUIRE(r.error == "EmptySubspace");
    REQUIRE(r.rho == 0.0);
  }
}

TEST_CASE("adversaries are applied inside the sweep", "[harness]") {
  json j = desk_json(400, {5});
  j["adversary"] = {{"kind", "hub"}, {"delta", 0.02}};
  bhrc::ExperimentConfig hub = bhrc::parse_config(j);
  std::vector<bhrc::RunRecord> recs = bhrc::run_pipeline(hub);
  REQUIRE(recs.size() == 1);
  INFO("error: " << recs[0].error);
  REQUIRE(recs[0].error.empty());
  REQUIRE(recs[0].rho >= 0.0);
  REQUIRE(recs[0].rho <= 1.0);

  j["adversary"] = {{"kind", "monotone"}, {"delta", 0.01}};
  bhrc::ExperimentConfig mono = bhrc::parse_config(j);
  std::vector<bhrc::RunRecord> mrecs = bhrc::run_pipeline(mono);
  REQUIRE(mrecs[0].error.empty());
  REQUIRE(mrecs[0].cfg_hash != recs[0].cfg_hash);
}

TEST_CASE("record serialization is stable and wall-clock free", "[harness]") {
  REQUIRE(bhrc::runrecord_csv_header() ==
          "# runrecord v1: seed,cfg_hash,rho,raw_inner,frob_w,frob_x,advantage,"
          "mi_per_vertex,phi_first,phi_final,trim_steps,dim_u,max_diag,"
          "c_over_sqrt_n,witness,wall_ms,certified,error");

  bhrc::RunRecord r;
  r.seed = 7;
  r.rho = 0.25;
  r.wall_ms = 123.4;
  std::string line = bhrc::to_csv(r);
  REQUIRE(std::count(line.begin(), line.end(), ',') == 17);

  bhrc::RunRecord slower = r;
  slower.wall_ms = 9999.0;
  REQUIRE(bhrc::record_hash(r) == bhrc::record_hash(slower));
  REQUIRE(bhrc::to_csv(r) != bhrc::to_csv(slower));

  json jr = bhrc::to_json(r);
  for (const char* key :
       {"seed", "cfg_hash", "rho", "raw_inner", "frob_w", "frob_x", "advantage",
        "mi_per_vertex", "phi_first", "phi_final", "trim_steps", "dim_u", "max_diag",
        "c_over_sqrt_n", "witness", "certified", "error"}) {
    REQUIRE(jr.contains(key));
  }
  REQUIRE(!jr.contains("wall_ms"));
}

TEST_CASE("determinant identity sweep stays at roundoff", "[harness]") {
  bhrc::IharaBassReport rep = bhrc::verify_ihara_bass(3, 40);
  REQUIRE(rep.graphs == 40);
  REQUIRE(rep.max_residual < 1e-8);
  REQUIRE(rep.max_tree_residual < 1e-10);
  REQUIRE(rep.triangle_residual < 1e-10);

  json j = bhrc::to_json(rep);
  REQUIRE(j.at("graphs").get<int>() == 40);
}

TEST_CASE("spectral sweep counts the planted directions", "[harness]") {
  bhrc::ExperimentConfig cfg = bhrc::parse_config(desk_json(1500, {1, 2}));
  bhrc::SpectraReport rep = bhrc::verify_spectra(cfg);
  REQUIRE(!rep.below_ks_mode);
  REQUIRE(rep.seeds.size() == 2);
  for (const auto& s : rep.seeds) {
    INFO("seed " << s.seed << " error: " << s.error);
    REQUIRE(s.error.empty());
    REQUIRE(s.count_h >= 1);
    REQUIRE(s.count_h <= 2);
    REQUIRE(s.count_mbar >= 1);
    REQUIRE(s.qform_per_n < 0.0);
  }
  REQUIRE(rep.h_pass_rate == 1.0);
  REQUIRE(rep.qform_pass_rate == 1.0);
  REQUIRE(rep.mean_qform_per_n < 0.0);

  json j = bhrc::to_json(rep);
  REQUIRE(j.at("seeds").size() == 2);

  json big = desk_json(20001, {1});
  REQUIRE(error_code([&] {
            bhrc::verify_spectra(bhrc::parse_config(big));
          }) == "TooLarge");
}

TEST_CASE("spectral sweep flips to the null mode without signal", "[harness]") {
  json j;
  j["model"] = {{"k", 2},
                {"d", 4.0},
                {"pi", {0.5, 0.5}},
                {"M", {{1.4, 0.6}, {0.6, 1.4}}}};
  j["n"] = 1500;
  j["seeds"] = {1, 2};
  bhrc::SpectraReport rep = bhrc::verify_spectra(bhrc::parse_config(j));
  REQUIRE(rep.below_ks_mode);
  REQUIRE(rep.seeds.size() == 2);
  REQUIRE(rep.below_ks_zero_rate >= 0.0);
  REQUIRE(rep.below_ks_zero_rate <= 1.0);
}

TEST_CASE("calibration freezes a margin under the clean mean", "[harness]") {
  json j = desk_json(400, {1, 2, 3});
  j["overrides"] = {{"Kcap", testutil::desk_kcap(testutil::two_block())}};
  j["adversary"] = {{"kind", "hub"}, {"delta", 0.01}};  // stripped by calibrate
  bhrc::ExperimentConfig cfg = bhrc::parse_config(j);

  json out = bhrc::calibrate(cfg);
  REQUIRE(out.at("_schema").get<std::string>() == "calibration v1");
  REQUIRE(out.at("n").get<int>() == 400);
  REQUIRE(out.at("rho_clean").get<double>() ==
          Catch::Approx(0.75 * out.at("mean_rho_measured").get<double>()));
  REQUIRE(out.contains("kcap_override"));
  REQUIRE(out.at("model").at("lambda2").get<double>() == Catch::Approx(0.6));

  // the measured mean matches a clean pipeline pass over the same seeds
  bhrc::ExperimentConfig clean = cfg;
  clean.adversary = bhrc::AdversarySpec{};
  std::vector<bhrc::RunRecord> recs = bhrc::run_pipeline(clean);
  double mean = 0.0;
  int ok = 0;
  for (const auto& r : recs) {
    if (r.error.empty()) {
      mean += r.rho;
      ok += 1;
    }
  }
  REQUIRE(ok > 0);
  REQUIRE(out.at("mean_rho_measured").get<double>() == Catch::Approx(mean / ok));
}
