// matchlab: command line front end for the matching laboratory.
//
// Exit codes: 0 success, 2 configuration problems, 3 failure-policy aborts
// (too many flagged trials), 1 anything else.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "matchlab/domain.hpp"
#include "matchlab/errors.hpp"
#include "matchlab/fields.hpp"
#include "matchlab/harness.hpp"
#include "matchlab/hjb.hpp"
#include "matchlab/rng.hpp"
#include "matchlab/spectral.hpp"
#include "matchlab/stats.hpp"
#include "matchlab/transport.hpp"

namespace {

using namespace matchlab;

struct GlobalOpts {
  std::uint64_t seed = 1;
  int threads = 1;  // accepted for interface stability; runs are serial
  std::string out_dir;
};

void print_groups(const ExperimentResult& res) {
  std::printf("# experiment=%s domain=%s trials=%ld\n",
              experiment_token(res.kind).c_str(), res.config.domain.c_str(),
              res.config.trials);
  std::printf("%8s %10s %8s %8s %14s %12s %14s %12s %12s\n", "n", "t", "used",
              "flagged", "mean", "se", "normalized", "norm_se", "slack");
  for (const GroupSummary& g : res.groups)
    std::printf("%8ld %10.3e %8zu %8zu %14.6e %12.3e %14.6e %12.3e %12.3e\n",
                g.n, g.t, g.used, g.flagged, g.mean, g.se, g.normalized,
                g.normalized_se, g.slack);
  for (const GroupSummary& g : res.groups)
    if (g.extra != 0.0 || g.extra_se != 0.0)
      std::printf("# n=%ld extra=%.6e extra_se=%.3e\n", g.n, g.extra,
                  g.extra_se);
}

void finish_run(ExperimentResult& res, const GlobalOpts& g) {
  print_groups(res);
  if (!g.out_dir.empty()) {
    const auto [csv, side] = write_outputs(res, g.out_dir);
    std::printf("# wrote %s and %s\n", csv.c_str(), side.c_str());
  }
}

std::vector<double> parse_s_grid(const std::string& text) {
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    // lo:hi:count, geometric spacing
    double lo = 0, hi = 0;
    int count = 0;
    if (std::sscanf(text.c_str(), "%lf:%lf:%d", &lo, &hi, &count) != 3 ||
        !(lo > 0) || !(hi > lo) || count < 2)
      throw ConfigError("bad --s-grid '" + text + "', want lo:hi:count");
    for (int i = 0; i < count; ++i)
      out.push_back(lo * std::pow(hi / lo, static_cast<double>(i) /
                                               (count - 1)));
    return out;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(std::stod(item));
  if (out.empty()) throw ConfigError("empty --s-grid");
  return out;
}

int cmd_sample(const std::string& domain, long n, const GlobalOpts& g) {
  const DomainGeometry dom(parse_domain_token(domain));
  Rng rng = Rng::from_key(g.seed, 0, static_cast<std::uint64_t>(n), 0);
  const EmpiricalSample s = draw_sample(dom, static_cast<std::size_t>(n), rng);
  std::printf("x,y\n");
  for (const Point& p : s.points) std::printf("%.17g,%.17g\n", p[0], p[1]);
  return 0;
}

int cmd_spectrum(const std::string& domain, int cutoff) {
  const DomainGeometry dom(parse_domain_token(domain));
  const SpectralBasis b = build_basis(dom, cutoff);
  std::printf("mode,lambda\n");
  for (std::size_t m = 0; m < b.lambda.size(); ++m)
    std::printf("%zu,%.17g\n", m, b.lambda[m]);
  return 0;
}

int cmd_trace(const std::string& domain, const std::string& s_grid,
              int cutoff) {
  const DomainGeometry dom(parse_domain_token(domain));
  const std::vector<double> ss = parse_s_grid(s_grid);
  const double s_min = *std::min_element(ss.begin(), ss.end());
  const int k = cutoff > 0 ? cutoff : required_cutoff(dom, s_min);
  const SpectralBasis b = build_basis(dom, k);
  const int d = dom.dimension();
  std::printf("s,trace,normalized\n");
  for (double s : ss) {
    const double tr = heat_trace(b, s);
    const double norm = std::pow(4.0 * M_PI * s, d / 2.0) * tr;
    std::printf("%.17g,%.17g,%.17g\n", s, tr, norm);
  }
  return 0;
}

int cmd_moments(const std::string& domain, const std::string& field,
                const std::string& with, long n) {
  const DomainGeometry dom(parse_domain_token(domain));
  const SpectralCoefficients f = named_field(dom, field);
  const SpectralCoefficients h = named_field(dom, with.empty() ? field : with);
  const int grid = 4 * f.basis->cutoff + 9;
  const GridField fv = synthesize(f, grid);
  const GridField hv = synthesize(h, grid);
  const MomentProfile prof = moments(fv.values, fv.weight());
  const PairingMoments pm = covariance_identities(
      fv.values, hv.values, fv.weight(), static_cast<std::size_t>(n));
  nlohmann::json j;
  j["field"] = field;
  j["profile"] = {{"mean", prof.mean},
                  {"m2", prof.m2},
                  {"m4", prof.m4},
                  {"m_inf", prof.m_inf}};
  j["pairing"] = {{"with", with.empty() ? field : with},
                  {"n", n},
                  {"second", pm.second},
                  {"fourth", pm.fourth}};
  std::printf("%s\n", j.dump(2).c_str());
  return 0;
}

int cmd_energy(const std::string& domain, long n, double t, long trials,
               const GlobalOpts& g) {
  ExperimentConfig cfg;
  cfg.domain = domain;
  cfg.experiment = "energy_identity";
  cfg.n_values = {n};
  cfg.trials = trials;
  cfg.t_rule.form = "fixed";
  cfg.t_rule.fixed_t = t;
  cfg.seed = g.seed;
  ExperimentResult res = run_experiment(cfg);
  std::printf("trial,value\n");
  for (const TrialRow& r : res.rows)
    std::printf("%ld,%.17g\n", r.trial, r.value);
  std::printf("# mean=%.10e se=%.3e reference_curve=%.10e\n",
              res.groups[0].mean, res.groups[0].se, res.groups[0].extra);
  if (!g.out_dir.empty()) write_outputs(res, g.out_dir);
  return 0;
}

int cmd_match(const std::string& domain, long n, int p, long trials,
              bool save_plan, const GlobalOpts& g) {
  if (p != 1 && p != 2) throw ConfigError("match: --p must be 1 or 2");
  if (save_plan) {
    const DomainGeometry dom(parse_domain_token(domain));
    if (dom.dimension() != 2)
      throw ConfigError("match: --save-plan needs a two-dimensional domain");
    if (g.out_dir.empty())
      throw ConfigError("match: --save-plan needs --out");
    namespace fs = std::filesystem;
    fs::create_directories(g.out_dir);
    const ExperimentKind kind = p == 2 ? ExperimentKind::MatchBipartite
                                       : ExperimentKind::W1Scaling;
    std::printf("trial,cost,plan_file\n");
    for (long trial = 0; trial < trials; ++trial) {
      Rng rng = Rng::from_key(g.seed, static_cast<std::uint64_t>(kind),
                              static_cast<std::uint64_t>(n),
                              static_cast<std::uint64_t>(trial));
      const EmpiricalSample a =
          draw_sample(dom, static_cast<std::size_t>(n), rng);
      const EmpiricalSample b =
          draw_sample(dom, static_cast<std::size_t>(n), rng);
      const TransportPlanResult r = w2_bipartite(a, b, p);
      nlohmann::json j;
      j["cost"] = r.cost;
      j["p"] = p;
      j["assignment"] = r.assignment;
      const std::string path =
          g.out_dir + "/plan_" + std::to_string(trial) + ".json";
      std::ofstream(path) << j.dump() << '\n';
      std::printf("%ld,%.17g,%s\n", trial, r.cost, path.c_str());
    }
    return 0;
  }
  ExperimentConfig cfg;
  cfg.domain = domain;
  cfg.experiment = p == 2 ? "match_bipartite" : "w1_scaling";
  cfg.n_values = {n};
  cfg.trials = trials;
  cfg.seed = g.seed;
  ExperimentResult res = run_experiment(cfg);
  finish_run(res, g);
  return 0;
}

// Bound experiments sweep the t = gamma log(n)/n schedule over a small gamma
// grid unless the caller pins one value; large gamma favors the event behind
// the lower bound, small gamma the upper bound, so both sides get reported.
const std::vector<double> kGammaSweep{0.25, 0.5, 1.0, 2.0};

int cmd_bound_upper(const std::string& domain, long n, double gamma,
                    bool gamma_set, long trials, const GlobalOpts& g) {
  for (double gm : gamma_set ? std::vector<double>{gamma} : kGammaSweep) {
    ExperimentConfig cfg;
    cfg.domain = domain;
    cfg.experiment = "dm_bound";
    cfg.n_values = {n};
    cfg.trials = trials;
    cfg.t_rule.gamma = gm;
    cfg.seed = g.seed;
    std::printf("# gamma=%g\n", gm);
    ExperimentResult res = run_experiment(cfg);
    finish_run(res, g);
  }
  return 0;
}

int cmd_bound_lower(const std::string& domain, long n, double t,
                    double sigma_floor, long trials, const GlobalOpts& g) {
  std::vector<ExperimentConfig> runs;
  if (t > 0.0) {
    ExperimentConfig cfg;
    cfg.t_rule.form = "fixed";
    cfg.t_rule.fixed_t = t;
    runs.push_back(cfg);
  } else {
    for (double gm : kGammaSweep) {
      ExperimentConfig cfg;
      cfg.t_rule.gamma = gm;
      runs.push_back(cfg);
    }
  }
  for (ExperimentConfig& cfg : runs) {
    cfg.domain = domain;
    cfg.experiment = "dual_bound";
    cfg.n_values = {n};
    cfg.trials = trials;
    cfg.sigma_floor = sigma_floor;
    cfg.seed = g.seed;
    std::printf("# t_rule form=%s gamma=%g t=%g\n", cfg.t_rule.form.c_str(),
                cfg.t_rule.gamma, cfg.t_rule.fixed_t);
    ExperimentResult res = run_experiment(cfg);
    finish_run(res, g);
  }
  return 0;
}

int cmd_experiment(const std::string& config_path, bool seed_set,
                   const GlobalOpts& g) {
  std::ifstream in(config_path);
  if (!in) throw ConfigError("cannot read config " + config_path);
  std::stringstream buf;
  buf << in.rdbuf();
  ExperimentConfig cfg = config_from_json(buf.str());
  if (seed_set) cfg.seed = g.seed;
  if (!g.out_dir.empty()) cfg.output_path = g.out_dir;
  ExperimentResult res = run_experiment(cfg);
  print_groups(res);
  const auto [csv, side] = write_outputs(res, cfg.output_path);
  std::printf("# wrote %s and %s\n", csv.c_str(), side.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for random matching costs"};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--seed", g.seed, "base seed for keyed trial streams")
      ->capture_default_str();
  app.add_option("--threads", g.threads,
                 "reserved; the current solvers run on one thread")
      ->check(CLI::PositiveNumber);
  app.add_option("--out", g.out_dir, "directory for CSV/JSON outputs");

  std::string domain = "torus2", field = "cos1", with_field, s_grid = "1e-4:1e-2:16";
  std::string config_path;
  long n = 64, trials = 100;
  int p = 2, cutoff = 0;
  double t = 0.0, gamma = 1.0, sigma_floor = 1.5e-3;
  bool save_plan = false;

  CLI::App* sample = app.add_subcommand("sample", "draw a uniform sample, CSV to stdout");
  sample->add_option("--domain", domain)->required();
  sample->add_option("--n", n)->required()->check(CLI::PositiveNumber);

  CLI::App* spectrum = app.add_subcommand("spectrum", "list basis eigenvalues, CSV to stdout");
  spectrum->add_option("--domain", domain)->required();
  spectrum->add_option("--cutoff", cutoff)->required()->check(CLI::PositiveNumber);

  CLI::App* trace = app.add_subcommand("trace", "heat trace over an s grid, CSV to stdout");
  trace->add_option("--domain", domain)->required();
  trace->add_option("--s-grid", s_grid, "lo:hi:count (geometric) or comma list")
      ->capture_default_str();
  trace->add_option("--cutoff", cutoff, "0 = certified from smallest s");

  CLI::App* moments = app.add_subcommand("moments", "quadrature moments of a named field, JSON");
  moments->add_option("--domain", domain)->capture_default_str();
  moments->add_option("--field", field)->capture_default_str();
  moments->add_option("--with", with_field, "second field for the pairing moments");
  moments->add_option("--n", n, "sample size entering the fourth-moment identity")
      ->capture_default_str();

  CLI::App* energy = app.add_subcommand("energy", "Monte Carlo Dirichlet energy vs. the spectral curve");
  energy->add_option("--domain", domain)->capture_default_str();
  energy->add_option("--n", n)->required();
  energy->add_option("--t", t)->required();
  energy->add_option("--trials", trials)->capture_default_str();

  CLI::App* match = app.add_subcommand("match", "empirical matching cost");
  match->add_option("--domain", domain)->required();
  match->add_option("--n", n)->required();
  match->add_option("--p", p, "1 or 2")->capture_default_str();
  match->add_option("--trials", trials)->capture_default_str();
  match->add_flag("--save-plan", save_plan, "write per-trial assignments (needs --out)");

  CLI::App* bu = app.add_subcommand("bound-upper", "flux interpolation upper bound");
  bu->add_option("--domain", domain)->capture_default_str();
  bu->add_option("--n", n)->required();
  bu->add_option("--gamma", gamma, "t = gamma log(n)/n")->capture_default_str();
  bu->add_option("--trials", trials)->capture_default_str();

  CLI::App* bl = app.add_subcommand("bound-lower", "viscous dual lower bound");
  bl->add_option("--domain", domain)->capture_default_str();
  bl->add_option("--n", n)->required();
  bl->add_option("--t", t, "fixed time; 0 = gamma rule with gamma 1");
  bl->add_option("--sigma-floor", sigma_floor)->capture_default_str();
  bl->add_option("--trials", trials)->capture_default_str();

  CLI::App* exp = app.add_subcommand("experiment", "full configured run with CSV/JSON outputs");
  exp->add_option("--config", config_path)->required()->check(CLI::ExistingFile);

  for (CLI::App* sub : {sample, spectrum, trace, moments, energy, match, bu, bl, exp})
    sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(sample)) return cmd_sample(domain, n, g);
    if (app.got_subcommand(spectrum)) return cmd_spectrum(domain, cutoff);
    if (app.got_subcommand(trace)) return cmd_trace(domain, s_grid, cutoff);
    if (app.got_subcommand(moments)) return cmd_moments(domain, field, with_field, n);
    if (app.got_subcommand(energy)) return cmd_energy(domain, n, t, trials, g);
    if (app.got_subcommand(match)) return cmd_match(domain, n, p, trials, save_plan, g);
    if (app.got_subcommand(bu))
      return cmd_bound_upper(domain, n, gamma, bu->count("--gamma") > 0, trials, g);
    if (app.got_subcommand(bl)) return cmd_bound_lower(domain, n, t, sigma_floor, trials, g);
    if (app.got_subcommand(exp))
      return cmd_experiment(config_path, app.count("--seed") > 0, g);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const TrialFailureError& e) {
    std::fprintf(stderr, "failure policy: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
