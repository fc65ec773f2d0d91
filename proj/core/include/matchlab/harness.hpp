#pragma once
// Experiment layer: configuration, trial scheduling, failure policy, and
// result serialization. Everything below is deterministic given the config
// seed; trial streams are keyed, never sequential, so runs are reproducible
// under any ordering.

#include <cstdint>
#include <string>
#include <vector>

#include "matchlab/domain.hpp"
#include "matchlab/fields.hpp"
#include "matchlab/rng.hpp"

namespace matchlab {

// Stable ids; these feed the RNG key, so the order is load-bearing.
enum class ExperimentKind : int {
  MatchBipartite = 1,
  MatchToUniform = 2,
  EnergyIdentity = 3,
  DmBound = 4,
  DualBound = 5,
  SupResidualSweep = 6,
  W1Scaling = 7,
  BipartiteIdentity = 8,
};

ExperimentKind parse_experiment_token(const std::string& token);
std::string experiment_token(ExperimentKind kind);

// Regularization time per sample size: t = gamma log(n)/n, t = n^{-2q}, or a
// fixed value. The logarithmic form needs n >= 2.
struct TRule {
  std::string form = "gamma_logn_over_n";
  double gamma = 1.0;
  double q = 0.25;
  double fixed_t = 0.01;
};
double t_for(const TRule& rule, long n);

struct ExperimentConfig {
  std::string domain = "torus2";
  std::string experiment = "match_bipartite";
  std::vector<long> n_values{64, 256};
  long trials = 100;
  TRule t_rule;
  int cutoff = 0;               // 0: certified from the heat tail at t
  int grid_size = 0;            // 0: 2 * cutoff + 1
  int quantization_factor = 4;  // grid atoms per sample point, k^d = qf * n
  double sigma_floor = 1.5e-3;
  double eta = 0.5;
  std::uint64_t seed = 1;
  std::string output_path = "out";
};

// JSON round-trip. Unknown keys are rejected so typos cannot silently run a
// default. Throws ConfigError on malformed input.
ExperimentConfig config_from_json(const std::string& text);
std::string config_to_json(const ExperimentConfig& cfg);

// n iid uniform points on the domain, consuming d doubles per point.
EmpiricalSample draw_sample(const DomainGeometry& dom, std::size_t n, Rng& rng);

struct TrialRow {
  long n = 0;
  long trial = 0;
  double value = 0.0;
  double aux1 = 0.0, aux2 = 0.0, aux3 = 0.0;
  bool flagged = false;
  std::string note;
};

struct GroupSummary {
  long n = 0;
  double t = 0.0;
  std::size_t used = 0;
  std::size_t flagged = 0;
  double mean = 0.0;
  double se = 0.0;
  double normalized = 0.0;     // n * mean in 1-d, (n / log n) * mean in 2-d
  double normalized_se = 0.0;
  double slack = 0.0;          // mean of reported per-trial slack, when any
  double extra = 0.0;          // experiment-specific (displacement integral)
  double extra_se = 0.0;       // jackknife error of extra
};

struct ExperimentResult {
  ExperimentConfig config;
  ExperimentKind kind = ExperimentKind::MatchBipartite;
  std::vector<std::string> aux_names;
  std::vector<TrialRow> rows;
  std::vector<GroupSummary> groups;
};

// Runs every (n, trial) cell. Trials that raise EventViolation or
// NumericError are flagged and excluded from the conditional means; if a
// group flags more than 1% of its trials the run aborts with
// TrialFailureError (the CLI maps that to exit code 3).
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// CSV of rows plus a JSON sidecar (config round-trip, build stamp, group
// summaries) under dir; returns the two paths written.
std::pair<std::string, std::string> write_outputs(const ExperimentResult& res,
                                                  const std::string& dir);

// Named band-limited test fields for the moment experiments ("cos1", "sin1",
// "mix"); defined on periodic domains.
std::vector<std::string> named_field_tokens();
SpectralCoefficients named_field(const DomainGeometry& dom,
                                 const std::string& token);

// Probability bound for the certified sup of the smoothed residual to exceed
// eta: a union bound over a covering net at the oscillation scale
// delta = eta t^{(d+1)/2} / (4 c_ge), each node controlled by the exponential
// moment tail at rate n t^{d/2} F(1, eta/2) / (2 c_uc). Valid at every n.
double residual_tail_bound(const DomainGeometry& dom,
                           const SemigroupConstants& c, std::size_t n,
                           double t, double eta);

}  // namespace matchlab
