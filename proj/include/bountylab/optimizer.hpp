#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bountylab/game.hpp"
#include "bountylab/metrics.hpp"
#include "bountylab/money.hpp"

namespace bountylab {

/// Capped(Proposed(epsilon, eta), alpha_cap).
RewardSpec capped_proposed(double epsilon, double eta, double alpha_cap);

/// Default eta and linear-baseline bonuses: 1% of the key value.
double default_bonus(const GameConfig& cfg);

struct EpsilonTracePoint {
  double epsilon = 0.0;
  MetricsReport report;
};

struct EpsilonOptimum {
  double epsilon_star = 1.0;
  double f_star = 0.0;
  std::vector<EpsilonTracePoint> trace;  // ascending epsilon
};

/// Evenly spaced points 0, step, ..., 1. The step must divide 1.
std::vector<double> epsilon_grid(double grid_step);

/// Grid search over epsilon: solve the MDP at the estimated attacker for each
/// Capped(Proposed(epsilon)) reward and keep the smallest f. Ties go to the
/// largest epsilon.
EpsilonOptimum optimize_epsilon(const GameConfig& cfg, const AttackerParams& est_params,
                                double alpha_cap, double eta, double grid_step,
                                const MetricsOptions& metrics = {});

struct SweepGrid {
  std::vector<double> ca_values;
  std::vector<double> ps_values;
  std::vector<std::string> specs;  // "proposed", "linear", "zero", "constant:<amount>"

  /// The 0.1..1.0 x 0.1..1.0 grid over proposed, linear and zero.
  static SweepGrid default_grid();
  /// Sorted, de-duplicated copy; throws ConfigError on empty axes or unknown labels.
  SweepGrid normalized() const;
};

struct SweepSettings {
  double alpha_cap = 0.8;
  double eta = -1.0;                // < 0: default_bonus(cfg)
  double linear_bonus = -1.0;       // eta_1
  double linear_time_bonus = -1.0;  // delta_1
  MetricsOptions metrics;
  int jobs = 1;
};

/// Builds the reward for a sweep label.
RewardSpec sweep_reward(const std::string& label, const GameConfig& cfg, double epsilon_star,
                        const SweepSettings& settings);

class SweepTable {
 public:
  SweepTable(GameConfig cfg, double epsilon_star, SweepGrid grid, MetricWeights weights);

  const GameConfig& config() const { return cfg_; }
  double epsilon_star() const { return epsilon_star_; }
  const SweepGrid& grid() const { return grid_; }
  const MetricWeights& weights() const { return weights_; }

  const MetricsReport& cell(std::size_t spec, std::size_t ca, std::size_t ps) const;
  MetricsReport& cell(std::size_t spec, std::size_t ca, std::size_t ps);
  /// Looks a cell up by label and axis values.
  const MetricsReport& at(const std::string& spec, double ca, double ps) const;

  /// f(proposed) <= f(every other spec) in the cell. Needs "proposed" in the grid.
  bool dominates(std::size_t ca, std::size_t ps) const;
  std::size_t dominance_count() const;

 private:
  std::size_t offset(std::size_t spec, std::size_t ca, std::size_t ps) const;

  GameConfig cfg_;
  double epsilon_star_;
  SweepGrid grid_;
  MetricWeights weights_;
  std::vector<MetricsReport> cells_;
};

/// Solves and scores every (spec, c_a, p_s) cell. Axes are normalized first,
/// so the table does not depend on the order the axes were given in.
SweepTable sweep(const GameConfig& cfg, double epsilon_star, const SweepGrid& grid,
                 const SweepSettings& settings = {});

/// p/q with q > 0, kept in lowest terms.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  static Rational make(std::int64_t num, std::int64_t den);
  double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const Rational&, const Rational&) = default;
};

Rational operator*(const Rational& a, const Rational& b);

/// Cloud-rental attacker cost model: each share needs `traces` signatures
/// observed at `tx_per_day`, renting a VM at `cloud_cost_per_day`.
struct CaseStudyModel {
  std::int64_t traces_required = 0;
  Rational tx_per_day;
  Rational days_per_share;
  Money cloud_cost_per_day;
  GameConfig game;  // CeilCapped value function, horizon in days
  DeterministicCost cost_fn;

  Money cost(int k) const { return cost_fn(k); }
  /// Cost to recover a full key, C(m).
  Money key_cost() const { return cost_fn(game.threshold); }
};

CaseStudyModel case_study_params(std::int64_t traces, Money tx_per_day, Money cloud_cost,
                                 double key_value, int threshold, int n_shares, int horizon_days);

}  // namespace bountylab
