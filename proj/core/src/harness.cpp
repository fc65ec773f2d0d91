#include "matchlab/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "json.hpp"
#include "matchlab/errors.hpp"
#include "matchlab/hjb.hpp"
#include "matchlab/spectral.hpp"
#include "matchlab/stats.hpp"
#include "matchlab/transport.hpp"

#ifndef MATCHLAB_GIT_DESCRIBE
#define MATCHLAB_GIT_DESCRIBE "unknown"
#endif

namespace matchlab {

namespace {

using nlohmann::json;

struct KindEntry {
  ExperimentKind kind;
  const char* token;
};

constexpr KindEntry kKinds[] = {
    {ExperimentKind::MatchBipartite, "match_bipartite"},
    {ExperimentKind::MatchToUniform, "match_to_uniform"},
    {ExperimentKind::EnergyIdentity, "energy_identity"},
    {ExperimentKind::DmBound, "dm_bound"},
    {ExperimentKind::DualBound, "dual_bound"},
    {ExperimentKind::SupResidualSweep, "sup_residual"},
    {ExperimentKind::W1Scaling, "w1_scaling"},
    {ExperimentKind::BipartiteIdentity, "bipartite_identity"},
};

std::vector<double> axis0(const EmpiricalSample& s) {
  std::vector<double> xs(s.points.size());
  for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = s.points[i][0];
  return xs;
}

bool uses_spectral(ExperimentKind k) {
  return k == ExperimentKind::EnergyIdentity || k == ExperimentKind::DmBound ||
         k == ExperimentKind::DualBound ||
         k == ExperimentKind::SupResidualSweep;
}

std::vector<std::string> aux_names_for(ExperimentKind k, int d) {
  switch (k) {
    case ExperimentKind::MatchToUniform:
      return d == 2 ? std::vector<std::string>{"slack", "cert_lo", "cert_hi"}
                    : std::vector<std::string>{};
    case ExperimentKind::DmBound:
      return {"min_density", "clamped_mass", "residual_error"};
    case ExperimentKind::DualBound:
      return {"slack", "residual_sup", "sigma"};
    case ExperimentKind::SupResidualSweep:
      return {"grid_value", "lip_slack", "per_axis"};
    case ExperimentKind::BipartiteIdentity:
      return {"to_uniform", "to_uniform_slack"};
    default:
      return {};
  }
}

// Which aux column carries a certified slack, if any (1-based; 0 = none).
int slack_column(ExperimentKind k, int d) {
  if (k == ExperimentKind::MatchToUniform && d == 2) return 1;
  if (k == ExperimentKind::DualBound) return 1;
  if (k == ExperimentKind::BipartiteIdentity) return 2;
  return 0;
}

int quantization_side(const ExperimentConfig& cfg, const DomainGeometry& dom,
                      long n) {
  const long atoms = static_cast<long>(cfg.quantization_factor) * n;
  if (dom.dimension() == 1) return static_cast<int>(atoms);
  const int k = static_cast<int>(std::lround(std::sqrt(
      static_cast<double>(atoms))));
  if (static_cast<long>(k) * k != atoms)
    throw ConfigError("quantization_factor * n = " + std::to_string(atoms) +
                      " is not a perfect square, cannot grid it");
  return k;
}

double normalization_factor(int d, long n) {
  if (d == 1) return static_cast<double>(n);
  return n > 1 ? static_cast<double>(n) / std::log(static_cast<double>(n))
               : 0.0;
}

std::string sanitize(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return s;
}

}  // namespace

ExperimentKind parse_experiment_token(const std::string& token) {
  for (const KindEntry& e : kKinds)
    if (token == e.token) return e.kind;
  std::string known;
  for (const KindEntry& e : kKinds) {
    if (!known.empty()) known += ", ";
    known += e.token;
  }
  throw ConfigError("unknown experiment '" + token + "' (one of: " + known +
                    ")");
}

std::string experiment_token(ExperimentKind kind) {
  for (const KindEntry& e : kKinds)
    if (kind == e.kind) return e.token;
  throw ConfigError("unmapped experiment kind");
}

double t_for(const TRule& rule, long n) {
  if (rule.form == "fixed") {
    if (!(rule.fixed_t > 0.0))
      throw ConfigError("t_rule: fixed form needs t > 0");
    return rule.fixed_t;
  }
  if (rule.form == "gamma_logn_over_n") {
    if (!(rule.gamma > 0.0)) throw ConfigError("t_rule: gamma <= 0");
    if (n < 2)
      throw ConfigError("t_rule: gamma log(n)/n needs n >= 2, got " +
                        std::to_string(n));
    return rule.gamma * std::log(static_cast<double>(n)) /
           static_cast<double>(n);
  }
  if (rule.form == "n_power") {
    if (!(rule.q > 0.0)) throw ConfigError("t_rule: n_power needs q > 0");
    if (n < 1) throw ConfigError("t_rule: n_power needs n >= 1");
    return std::pow(static_cast<double>(n), -2.0 * rule.q);
  }
  throw ConfigError("t_rule: unknown form '" + rule.form + "'");
}

ExperimentConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: parse failure: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: top level must be an object");

  ExperimentConfig cfg;
  const auto known = [](const json& obj,
                        std::initializer_list<const char*> keys) {
    for (const auto& [key, _] : obj.items()) {
      bool ok = false;
      for (const char* k : keys) ok = ok || key == k;
      if (!ok) throw ConfigError("config: unknown key '" + key + "'");
    }
  };
  known(j, {"domain", "experiment", "n_values", "trials", "t_rule", "cutoff",
            "grid_size", "quantization_factor", "sigma_floor", "eta", "seed",
            "output_path"});
  try {
    if (j.contains("domain")) cfg.domain = j["domain"].get<std::string>();
    if (j.contains("experiment"))
      cfg.experiment = j["experiment"].get<std::string>();
    if (j.contains("n_values"))
      cfg.n_values = j["n_values"].get<std::vector<long>>();
    if (j.contains("trials")) cfg.trials = j["trials"].get<long>();
    if (j.contains("t_rule")) {
      const json& r = j["t_rule"];
      known(r, {"form", "gamma", "q", "t"});
      if (r.contains("form")) cfg.t_rule.form = r["form"].get<std::string>();
      if (r.contains("gamma")) cfg.t_rule.gamma = r["gamma"].get<double>();
      if (r.contains("q")) cfg.t_rule.q = r["q"].get<double>();
      if (r.contains("t")) cfg.t_rule.fixed_t = r["t"].get<double>();
    }
    if (j.contains("cutoff")) cfg.cutoff = j["cutoff"].get<int>();
    if (j.contains("grid_size")) cfg.grid_size = j["grid_size"].get<int>();
    if (j.contains("quantization_factor"))
      cfg.quantization_factor = j["quantization_factor"].get<int>();
    if (j.contains("sigma_floor"))
      cfg.sigma_floor = j["sigma_floor"].get<double>();
    if (j.contains("eta")) cfg.eta = j["eta"].get<double>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("output_path"))
      cfg.output_path = j["output_path"].get<std::string>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: bad field type: ") + e.what());
  }

  parse_domain_token(cfg.domain);
  parse_experiment_token(cfg.experiment);
  if (cfg.n_values.empty()) throw ConfigError("config: n_values is empty");
  for (long n : cfg.n_values)
    if (n < 1) throw ConfigError("config: n_values entries must be >= 1");
  if (cfg.trials < 1) throw ConfigError("config: trials < 1");
  if (cfg.cutoff < 0) throw ConfigError("config: cutoff < 0");
  if (cfg.grid_size < 0) throw ConfigError("config: grid_size < 0");
  if (cfg.quantization_factor < 1)
    throw ConfigError("config: quantization_factor < 1");
  if (!(cfg.sigma_floor > 0.0)) throw ConfigError("config: sigma_floor <= 0");
  if (!(cfg.eta > 0.0)) throw ConfigError("config: eta <= 0");
  return cfg;
}

std::string config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["domain"] = cfg.domain;
  j["experiment"] = cfg.experiment;
  j["n_values"] = cfg.n_values;
  j["trials"] = cfg.trials;
  j["t_rule"] = {{"form", cfg.t_rule.form},
                 {"gamma", cfg.t_rule.gamma},
                 {"q", cfg.t_rule.q},
                 {"t", cfg.t_rule.fixed_t}};
  j["cutoff"] = cfg.cutoff;
  j["grid_size"] = cfg.grid_size;
  j["quantization_factor"] = cfg.quantization_factor;
  j["sigma_floor"] = cfg.sigma_floor;
  j["eta"] = cfg.eta;
  j["seed"] = cfg.seed;
  j["output_path"] = cfg.output_path;
  return j.dump(2);
}

EmpiricalSample draw_sample(const DomainGeometry& dom, std::size_t n,
                            Rng& rng) {
  EmpiricalSample s;
  s.dom = dom;
  s.points.resize(n);
  const int d = dom.dimension();
  for (std::size_t i = 0; i < n; ++i) {
    s.points[i].c[0] = rng.next_double();
    s.points[i].c[1] = d == 2 ? rng.next_double() : 0.0;
  }
  return s;
}

std::vector<std::string> named_field_tokens() { return {"cos1", "sin1", "mix"}; }

SpectralCoefficients named_field(const DomainGeometry& dom,
                                 const std::string& token) {
  if (!dom.periodic())
    throw ConfigError("named fields are defined on periodic domains");
  auto basis = std::make_shared<SpectralBasis>(build_basis(dom, 2));
  SpectralCoefficients f;
  f.basis = basis;
  f.kind = CoeffKind::Potential;
  f.values.assign(basis->mode_count(), 0.0);
  // Axis order on periodic domains: 1, cos(2pi x), sin(2pi x), cos(4pi x),
  // sin(4pi x). In two dimensions the second axis factor is the constant.
  const std::size_t A = basis->axis.size();
  const auto mode = [&](std::size_t axis_fn) {
    return dom.dimension() == 1 ? axis_fn : axis_fn * A;
  };
  if (token == "cos1") {
    f.values[mode(1)] = 1.0;
  } else if (token == "sin1") {
    f.values[mode(2)] = 1.0;
  } else if (token == "mix") {
    f.values[mode(1)] = 1.0;
    f.values[mode(4)] = 0.7;
  } else {
    throw ConfigError("unknown field '" + token +
                      "' (one of: cos1, sin1, mix)");
  }
  return f;
}

double residual_tail_bound(const DomainGeometry& dom,
                           const SemigroupConstants& c, std::size_t n,
                           double t, double eta) {
  if (!(t > 0.0) || !(eta > 0.0) || n == 0)
    throw std::invalid_argument("residual_tail_bound: bad arguments");
  const int d = dom.dimension();
  const double delta = eta * std::pow(t, (d + 1) / 2.0) / (4.0 * c.c_ge);
  const double net = static_cast<double>(covering_number(dom, delta));
  const double rate = static_cast<double>(n) * std::pow(t, d / 2.0) /
                      (2.0 * c.c_uc) * tail_rate(1.0, eta / 2.0);
  return 2.0 * net * std::exp(-rate);
}

namespace {

struct GroupContext {
  long n = 0;
  double t = 0.0;
  int grid = 0;
  int quant_k = 0;
  std::shared_ptr<const SpectralBasis> basis;
};

TrialRow run_one_trial(const ExperimentConfig& cfg, ExperimentKind kind,
                       const DomainGeometry& dom, const GroupContext& gc,
                       long trial, std::optional<DisplacementAccumulator>& disp) {
  const long n = gc.n;
  Rng rng = Rng::from_key(cfg.seed, static_cast<std::uint64_t>(kind),
                          static_cast<std::uint64_t>(n),
                          static_cast<std::uint64_t>(trial));
  TrialRow row;
  row.n = n;
  row.trial = trial;

  switch (kind) {
    case ExperimentKind::MatchBipartite: {
      const EmpiricalSample a = draw_sample(dom, n, rng);
      const EmpiricalSample b = draw_sample(dom, n, rng);
      if (dom.kind() == DomainKind::Interval)
        row.value = w2_interval_empirical(axis0(a), axis0(b));
      else if (dom.kind() == DomainKind::Circle)
        row.value = w2_circle_empirical(axis0(a), axis0(b));
      else
        row.value = w2_bipartite(a, b, 2).cost;
      break;
    }
    case ExperimentKind::W1Scaling: {
      const EmpiricalSample a = draw_sample(dom, n, rng);
      const EmpiricalSample b = draw_sample(dom, n, rng);
      if (dom.kind() == DomainKind::Interval) {
        std::vector<double> xs = axis0(a), ys = axis0(b);
        std::sort(xs.begin(), xs.end());
        std::sort(ys.begin(), ys.end());
        double acc = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i)
          acc += std::fabs(xs[i] - ys[i]);
        row.value = acc / static_cast<double>(n);
      } else {
        row.value = w2_bipartite(a, b, 1).cost;
      }
      break;
    }
    case ExperimentKind::MatchToUniform: {
      const EmpiricalSample a = draw_sample(dom, n, rng);
      if (dom.kind() == DomainKind::Interval) {
        row.value = w2_interval_to_uniform(axis0(a));
      } else if (dom.kind() == DomainKind::Circle) {
        row.value = w2_circle_to_uniform(axis0(a));
      } else {
        const QuantizedPlan q = w2_to_uniform_quantized(a, gc.quant_k);
        row.value = q.plan.cost;
        row.aux1 = q.plan.slack;
        const double w = std::sqrt(q.plan.cost);
        row.aux2 = std::pow(std::max(w - q.grid_gap, 0.0), 2);
        row.aux3 = std::pow(w + q.grid_gap, 2);
      }
      break;
    }
    case ExperimentKind::EnergyIdentity: {
      const EmpiricalSample a = draw_sample(dom, n, rng);
      const SpectralCoefficients r = residual_coefficients(a, gc.basis);
      const SpectralCoefficients rs = heat_smooth(r, gc.t);
      row.value = dirichlet_energy(poisson_solve(rs));
      break;
    }
    case ExperimentKind::DmBound: {
      const EmpiricalSample a = draw_sample(dom, n, rng);
      const SpectralCoefficients r = residual_coefficients(a, gc.basis);
      SpectralCoefficients rs = heat_smooth(r, gc.t);
      const GridField u0 = density_field(rs, static_cast<std::size_t>(n),
                                         gc.grid);
      // Delta f = 1 - u0 = -(smoothed residual)/sqrt(n).
      SpectralCoefficients rhs = rs;
      const double scale = -1.0 / std::sqrt(static_cast<double>(n));
      for (double& cvalue : rhs.values) cvalue *= scale;
      const DmBound b = dm_upper_bound(u0, poisson_solve(rhs));
      row.value = b.value;
      row.aux1 = b.min_density;
      row.aux2 = b.clamped_mass;
      row.aux3 = b.residual_error;
      if (!std::isfinite(b.value))
        throw EventViolation("dm bound infinite: density clamped to zero "
                             "where flux is nonzero");
      break;
    }
    case ExperimentKind::DualBound: {
      const EmpiricalSample a = draw_sample(dom, n, rng);
      const SpectralCoefficients r = residual_coefficients(a, gc.basis);
      const SpectralCoefficients rs = heat_smooth(r, gc.t);
      const DualLowerBound lb =
          dual_lower_bound(rs, static_cast<std::size_t>(n), gc.t,
                           cfg.sigma_floor, cfg.eta);
      row.value = lb.value;
      row.aux1 = lb.slack;
      row.aux2 = lb.residual_sup;
      row.aux3 = lb.sigma;
      break;
    }
    case ExperimentKind::SupResidualSweep: {
      const EmpiricalSample a = draw_sample(dom, n, rng);
      const SpectralCoefficients r = residual_coefficients(a, gc.basis);
      const SpectralCoefficients rs = heat_smooth(r, gc.t);
      const SupResidual sr =
          sup_residual(rs, static_cast<std::size_t>(n), gc.t,
                       dom.declared_constants().c_ge, cfg.eta / 4.0);
      row.value = sr.value + sr.slack;
      row.aux1 = sr.value;
      row.aux2 = sr.slack;
      row.aux3 = sr.per_axis;
      break;
    }
    case ExperimentKind::BipartiteIdentity: {
      const EmpiricalSample a = draw_sample(dom, n, rng);
      const EmpiricalSample b = draw_sample(dom, n, rng);
      if (dom.kind() == DomainKind::Interval)
        row.value = w2_interval_empirical(axis0(a), axis0(b));
      else if (dom.kind() == DomainKind::Circle)
        row.value = w2_circle_empirical(axis0(a), axis0(b));
      else
        row.value = w2_bipartite(a, b, 2).cost;
      const QuantizedPlan q = w2_to_uniform_quantized(a, gc.quant_k);
      row.aux1 = q.plan.cost;
      row.aux2 = q.plan.slack;
      disp->add_trial(q);
      break;
    }
  }
  return row;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  const DomainGeometry dom(parse_domain_token(cfg.domain));
  const ExperimentKind kind = parse_experiment_token(cfg.experiment);
  const int d = dom.dimension();

  ExperimentResult res;
  res.config = cfg;
  res.kind = kind;
  res.aux_names = aux_names_for(kind, d);
  const int slack_col = slack_column(kind, d);

  for (long n : cfg.n_values) {
    GroupContext gc;
    gc.n = n;
    if (uses_spectral(kind)) {
      gc.t = t_for(cfg.t_rule, n);
      const int cutoff =
          cfg.cutoff > 0 ? cfg.cutoff : required_cutoff(dom, gc.t);
      gc.basis = std::make_shared<SpectralBasis>(build_basis(dom, cutoff));
      gc.grid = cfg.grid_size > 0 ? cfg.grid_size : 2 * cutoff + 1;
    }
    const bool quantizes =
        kind == ExperimentKind::BipartiteIdentity ||
        (kind == ExperimentKind::MatchToUniform && d == 2);
    std::optional<DisplacementAccumulator> disp;
    if (quantizes) {
      gc.quant_k = quantization_side(cfg, dom, n);
      if (kind == ExperimentKind::BipartiteIdentity)
        disp.emplace(dom, gc.quant_k);
    }

    GroupSummary g;
    g.n = n;
    g.t = gc.t;
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(cfg.trials));
    double slack_acc = 0.0;
    for (long trial = 0; trial < cfg.trials; ++trial) {
      TrialRow row;
      try {
        row = run_one_trial(cfg, kind, dom, gc, trial, disp);
        values.push_back(row.value);
        if (slack_col == 1) slack_acc += row.aux1;
        if (slack_col == 2) slack_acc += row.aux2;
      } catch (const EventViolation& e) {
        row.n = n;
        row.trial = trial;
        row.flagged = true;
        row.note = e.what();
      } catch (const NumericError& e) {
        row.n = n;
        row.trial = trial;
        row.flagged = true;
        row.note = e.what();
      }
      if (row.flagged) ++g.flagged;
      res.rows.push_back(std::move(row));
    }

    g.used = values.size();
    if (g.used == 0)
      throw TrialFailureError("all " + std::to_string(cfg.trials) +
                              " trials flagged at n = " + std::to_string(n));
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(g.used);
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var = g.used > 1 ? var / (static_cast<double>(g.used) - 1.0) : 0.0;
    g.mean = mean;
    g.se = std::sqrt(var / static_cast<double>(g.used));
    const double factor = normalization_factor(d, n);
    g.normalized = factor * mean;
    g.normalized_se = factor * g.se;
    g.slack = slack_col ? slack_acc / static_cast<double>(g.used) : 0.0;
    if (kind == ExperimentKind::EnergyIdentity)
      g.extra = energy_curve(*gc.basis, gc.t);
    if (kind == ExperimentKind::BipartiteIdentity && disp) {
      const DisplacementAccumulator::Result dr = disp->finalize();
      g.extra = dr.integral;
      g.extra_se = dr.jackknife_se;
    }
    res.groups.push_back(g);

    if (static_cast<double>(g.flagged) >
        0.01 * static_cast<double>(cfg.trials))
      throw TrialFailureError(
          std::to_string(g.flagged) + " of " + std::to_string(cfg.trials) +
          " trials flagged at n = " + std::to_string(n) +
          " (policy allows 1%); last note: " +
          (res.rows.empty() ? "" : res.rows.back().note));
  }
  return res;
}

std::pair<std::string, std::string> write_outputs(const ExperimentResult& res,
                                                  const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const std::string base =
      experiment_token(res.kind) + "_" + res.config.domain;
  const std::string csv_path = dir + "/" + base + ".csv";
  const std::string json_path = dir + "/" + base + ".json";

  std::vector<std::string> aux = res.aux_names;
  while (aux.size() < 3) aux.push_back("aux" + std::to_string(aux.size() + 1));

  std::ofstream csv(csv_path);
  if (!csv) throw ConfigError("cannot write " + csv_path);
  csv << "experiment,domain,n,trial,value," << aux[0] << ',' << aux[1] << ','
      << aux[2] << ",flagged,note\n";
  csv.precision(17);
  for (const TrialRow& r : res.rows)
    csv << experiment_token(res.kind) << ',' << res.config.domain << ','
        << r.n << ',' << r.trial << ',' << r.value << ',' << r.aux1 << ','
        << r.aux2 << ',' << r.aux3 << ',' << (r.flagged ? 1 : 0) << ','
        << sanitize(r.note) << '\n';
  csv.close();

  json side;
  side["config"] = json::parse(config_to_json(res.config));
  side["build"] = MATCHLAB_GIT_DESCRIBE;
  side["experiment"] = experiment_token(res.kind);
  side["aux_names"] = res.aux_names;
  side["groups"] = json::array();
  for (const GroupSummary& g : res.groups) {
    json jg;
    jg["n"] = g.n;
    jg["t"] = g.t;
    jg["used"] = g.used;
    jg["flagged"] = g.flagged;
    jg["mean"] = g.mean;
    jg["se"] = g.se;
    jg["normalized"] = g.normalized;
    jg["normalized_se"] = g.normalized_se;
    jg["slack"] = g.slack;
    jg["extra"] = g.extra;
    jg["extra_se"] = g.extra_se;
    side["groups"].push_back(jg);
  }
  std::ofstream js(json_path);
  if (!js) throw ConfigError("cannot write " + json_path);
  js << side.dump(2) << '\n';
  return {csv_path, json_path};
}

}  // namespace matchlab
