#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "matchlab/domain.hpp"
#include "matchlab/errors.hpp"
#include "matchlab/harness.hpp"
#include "matchlab/rng.hpp"
#include "matchlab/spectral.hpp"
#include "oracles.hpp"

using namespace matchlab;

TEST_CASE("regularization time rules") {
  TRule log_rule;
  log_rule.form = "gamma_logn_over_n";
  log_rule.gamma = 2.0;
  CHECK(t_for(log_rule, 10) ==
        doctest::Approx(2.0 * std::log(10.0) / 10.0).epsilon(1e-14));
  CHECK_THROWS_AS(t_for(log_rule, 1), ConfigError);
  log_rule.gamma = 0.0;
  CHECK_THROWS_AS(t_for(log_rule, 10), ConfigError);

  TRule power;
  power.form = "n_power";
  power.q = 0.25;
  CHECK(t_for(power, 16) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(t_for(power, 1) == doctest::Approx(1.0).epsilon(1e-14));
  power.q = -1.0;
  CHECK_THROWS_AS(t_for(power, 4), ConfigError);

  TRule fixed;
  fixed.form = "fixed";
  fixed.fixed_t = 0.03;
  CHECK(t_for(fixed, 1) == doctest::Approx(0.03).epsilon(1e-15));
  fixed.fixed_t = 0.0;
  CHECK_THROWS_AS(t_for(fixed, 4), ConfigError);

  TRule junk;
  junk.form = "nosuch";
  CHECK_THROWS_AS(t_for(junk, 4), ConfigError);
}

TEST_CASE("experiment tokens round-trip") {
  for (ExperimentKind k :
       {ExperimentKind::MatchBipartite, ExperimentKind::MatchToUniform,
        ExperimentKind::EnergyIdentity, ExperimentKind::DmBound,
        ExperimentKind::DualBound, ExperimentKind::SupResidualSweep,
        ExperimentKind::W1Scaling, ExperimentKind::BipartiteIdentity}) {
    CHECK(parse_experiment_token(experiment_token(k)) == k);
  }
  CHECK_THROWS_AS(parse_experiment_token("frobnicate"), ConfigError);
}

TEST_CASE("config JSON round-trip rejects unknown keys") {
  ExperimentConfig cfg;
  cfg.domain = "torus2";
  cfg.experiment = "dual_bound";
  cfg.n_values = {16, 64};
  cfg.trials = 11;
  cfg.t_rule.form = "n_power";
  cfg.t_rule.q = 0.4;
  cfg.eta = 0.7;
  cfg.seed = 99;
  cfg.output_path = "some/dir";
  const std::string text = config_to_json(cfg);
  ExperimentConfig back = config_from_json(text);
  CHECK(back.domain == cfg.domain);
  CHECK(back.experiment == cfg.experiment);
  CHECK(back.n_values == cfg.n_values);
  CHECK(back.trials == cfg.trials);
  CHECK(back.t_rule.form == cfg.t_rule.form);
  CHECK(back.t_rule.q == doctest::Approx(cfg.t_rule.q));
  CHECK(back.eta == doctest::Approx(cfg.eta));
  CHECK(back.seed == cfg.seed);
  CHECK(back.output_path == cfg.output_path);
  CHECK(config_to_json(back) == text);

  ExperimentConfig defaults = config_from_json("{}");
  CHECK(defaults.domain == "torus2");
  CHECK(defaults.experiment == "match_bipartite");

  nlohmann::json j = nlohmann::json::parse(text);
  j["bogus"] = 1;
  CHECK_THROWS_AS(config_from_json(j.dump()), ConfigError);
  nlohmann::json j2 = nlohmann::json::parse(text);
  j2["t_rule"]["bogus"] = 1;
  CHECK_THROWS_AS(config_from_json(j2.dump()), ConfigError);
  CHECK_THROWS_AS(config_from_json("not json at all"), ConfigError);
  CHECK_THROWS_AS(config_from_json("[1,2]"), ConfigError);
}

TEST_CASE("keyed RNG streams are reproducible and distinct") {
  Rng a = Rng::from_key(5, 2, 64, 3);
  Rng b = Rng::from_key(5, 2, 64, 3);
  Rng c = Rng::from_key(5, 2, 64, 4);
  bool all_equal = true, any_equal_c = false;
  for (int i = 0; i < 64; ++i) {
    const double va = a.next_double();
    const double vb = b.next_double();
    const double vc = c.next_double();
    CHECK(va >= 0.0);
    CHECK(va < 1.0);
    all_equal = all_equal && (va == vb);
    any_equal_c = any_equal_c || (va == vc);
  }
  CHECK(all_equal);
  CHECK_FALSE(any_equal_c);
  Rng d = Rng::from_key(5, 2, 64, 3);
  for (int i = 0; i < 1000; ++i) {
    const std::uint64_t v = d.next_below(17);
    CHECK(v < 17);
  }
}

TEST_CASE("uniform sampling fills the domain uniformly") {
  DomainGeometry torus(DomainKind::Torus2);
  Rng rng = Rng::from_key(11, 1, 20000, 0);
  EmpiricalSample s = draw_sample(torus, 20000, rng);
  REQUIRE(s.points.size() == 20000);
  std::vector<double> xs, ys;
  for (const Point& p : s.points) {
    CHECK(p[0] >= 0.0);
    CHECK(p[0] < 1.0);
    CHECK(p[1] >= 0.0);
    CHECK(p[1] < 1.0);
    xs.push_back(p[0]);
    ys.push_back(p[1]);
  }
  const double crit = 1.6276 / std::sqrt(20000.0);  // 1% one-sample KS level
  CHECK(oracles::ks_uniform(xs) < crit);
  CHECK(oracles::ks_uniform(ys) < crit);

  Rng rng2 = Rng::from_key(11, 1, 20000, 0);
  EmpiricalSample s2 = draw_sample(torus, 20000, rng2);
  CHECK(s2.points[123][0] == s.points[123][0]);
  CHECK(s2.points[123][1] == s.points[123][1]);
}

TEST_CASE("interval matching experiments reproduce closed-form means") {
  ExperimentConfig cfg;
  cfg.domain = "interval";
  cfg.experiment = "match_to_uniform";
  cfg.n_values = {1, 10};
  cfg.trials = 4000;
  cfg.seed = 3;
  ExperimentResult res = run_experiment(cfg);
  REQUIRE(res.groups.size() == 2);
  for (const GroupSummary& g : res.groups) {
    CHECK(g.used == 4000);
    CHECK(g.flagged == 0);
    CHECK(std::abs(g.mean - 1.0 / (6.0 * static_cast<double>(g.n))) <
          4.0 * g.se);
    CHECK(g.normalized ==
          doctest::Approx(static_cast<double>(g.n) * g.mean).epsilon(1e-12));
  }
  CHECK(res.rows.size() == 8000);

  ExperimentConfig bi = cfg;
  bi.experiment = "match_bipartite";
  bi.n_values = {2};
  bi.trials = 4000;
  ExperimentResult res2 = run_experiment(bi);
  REQUIRE(res2.groups.size() == 1);
  CHECK(std::abs(res2.groups[0].mean - 1.0 / 9.0) < 4.0 * res2.groups[0].se);
}

TEST_CASE("energy identity group reports its spectral reference") {
  ExperimentConfig cfg;
  cfg.domain = "circle";
  cfg.experiment = "energy_identity";
  cfg.n_values = {16};
  cfg.trials = 400;
  cfg.t_rule.form = "fixed";
  cfg.t_rule.fixed_t = 0.01;
  cfg.seed = 5;
  ExperimentResult res = run_experiment(cfg);
  REQUIRE(res.groups.size() == 1);
  const GroupSummary& g = res.groups[0];
  CHECK(g.t == doctest::Approx(0.01).epsilon(1e-14));
  CHECK(g.extra > 0.0);
  CHECK(std::abs(g.mean - g.extra) < 5.0 * g.se);
}

TEST_CASE("quantized matching rows carry certified intervals") {
  ExperimentConfig cfg;
  cfg.domain = "torus2";
  cfg.experiment = "match_to_uniform";
  cfg.n_values = {4};
  cfg.trials = 60;
  cfg.quantization_factor = 4;  // 16 atoms, a 4 x 4 grid
  cfg.seed = 7;
  ExperimentResult res = run_experiment(cfg);
  REQUIRE(res.aux_names.size() == 3);
  CHECK(res.aux_names[0] == "slack");
  CHECK(res.aux_names[1] == "cert_lo");
  CHECK(res.aux_names[2] == "cert_hi");
  for (const TrialRow& row : res.rows) {
    CHECK(row.aux1 > 0.0);
    CHECK(row.aux2 >= 0.0);
    CHECK(row.aux2 <= row.value + 1e-15);
    CHECK(row.value <= row.aux3 + 1e-15);
  }
  CHECK(res.groups[0].slack ==
        doctest::Approx(res.rows[0].aux1).epsilon(1e-12));

  // 4 * 6 = 24 atoms has no square grid, so the config is rejected.
  ExperimentConfig bad = cfg;
  bad.n_values = {6};
  CHECK_THROWS_AS(run_experiment(bad), ConfigError);
}

TEST_CASE("dual bound experiment populates certificates") {
  ExperimentConfig cfg;
  cfg.domain = "torus2";
  cfg.experiment = "dual_bound";
  cfg.n_values = {16};
  cfg.trials = 10;
  cfg.t_rule.gamma = 1.0;
  cfg.eta = 0.5;
  cfg.seed = 9;
  ExperimentResult res = run_experiment(cfg);
  REQUIRE(res.groups.size() == 1);
  CHECK(res.groups[0].used == 10);
  for (const TrialRow& row : res.rows) {
    if (row.flagged) continue;
    CHECK(row.aux1 > 0.0);             // slack
    CHECK(row.aux2 > 0.0);             // certified sup
    CHECK(row.aux3 >= cfg.sigma_floor);  // viscosity used
  }
}

TEST_CASE("an impossible event threshold fails the whole group") {
  ExperimentConfig cfg;
  cfg.domain = "torus2";
  cfg.experiment = "dual_bound";
  cfg.n_values = {16};
  cfg.trials = 8;
  // At this mild smoothing the residual sup sits near one, far above eta,
  // so trials keep getting flagged until the failure policy trips.
  cfg.t_rule.form = "fixed";
  cfg.t_rule.fixed_t = 0.02;
  cfg.eta = 0.4;
  cfg.seed = 13;
  CHECK_THROWS_AS(run_experiment(cfg), TrialFailureError);
}

TEST_CASE("experiment outputs land on disk as CSV plus JSON") {
  namespace fs = std::filesystem;
  ExperimentConfig cfg;
  cfg.domain = "interval";
  cfg.experiment = "match_to_uniform";
  cfg.n_values = {4};
  cfg.trials = 12;
  cfg.seed = 21;
  cfg.output_path =
      (fs::temp_directory_path() / "matchlab_harness_test").string();
  ExperimentResult res = run_experiment(cfg);
  auto [csv_path, json_path] = write_outputs(res, cfg.output_path);
  CHECK(fs::exists(csv_path));
  CHECK(fs::exists(json_path));

  std::ifstream csv(csv_path);
  std::string line;
  std::size_t lines = 0;
  while (std::getline(csv, line)) ++lines;
  CHECK(lines >= res.rows.size() + 1);  // header plus one line per trial

  std::ifstream jf(json_path);
  std::stringstream buf;
  buf << jf.rdbuf();
  nlohmann::json j = nlohmann::json::parse(buf.str());
  CHECK(j.contains("groups"));
  CHECK(j["groups"].size() == 1);
  CHECK(j.contains("config"));
  fs::remove_all(cfg.output_path);
}

TEST_CASE("residual tail bound composes net size and rate") {
  DomainGeometry torus(DomainKind::Torus2);
  SemigroupConstants c = torus.declared_constants();
  const double t = 0.1, eta = 0.5;
  const std::size_t n = 256;
  const double delta = eta * std::pow(t, 1.5) / (4.0 * c.c_ge);
  const double want =
      2.0 * static_cast<double>(covering_number(torus, delta)) *
      std::exp(-static_cast<double>(n) * t / (2.0 * c.c_uc) *
               tail_rate(1.0, eta / 2.0));
  CHECK(residual_tail_bound(torus, c, n, t, eta) ==
        doctest::Approx(want).epsilon(1e-12));

  // Monotone: more samples or a higher threshold can only shrink it.
  double prev = 1e300;
  for (std::size_t m : {16u, 64u, 256u, 1024u}) {
    const double b = residual_tail_bound(torus, c, m, t, eta);
    CHECK(b < prev);
    prev = b;
  }
  prev = 1e300;
  for (double e : {0.25, 0.5, 1.0, 2.0}) {
    const double b = residual_tail_bound(torus, c, n, t, e);
    CHECK(b <= prev);
    prev = b;
  }
  CHECK_THROWS_AS(residual_tail_bound(torus, c, 0, t, eta),
                  std::invalid_argument);
}
