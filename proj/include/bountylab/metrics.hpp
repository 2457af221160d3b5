#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "bountylab/game.hpp"
#include "bountylab/mdp.hpp"

namespace bountylab {

/// Weights of the f-score: alpha1 on sell probability, alpha2 on normalized
/// holding time, the remainder on normalized defender cost.
struct MetricWeights {
  double alpha1 = 1.0 / 3.0;
  double alpha2 = 1.0 / 3.0;

  void validate() const;
};

enum class HoldTimeMode {
  Conditional,    // E[t_end - t_first | at least one share]
  Unconditional,  // E[(t_end - t_first) * 1{at least one share}]
};

struct MetricsOptions {
  MetricWeights weights;
  HoldTimeMode hold_time = HoldTimeMode::Conditional;
};

struct MetricsReport {
  double p_sell = 0.0;          // p_e
  double mean_hold_time = 0.0;  // t_h, in slots
  double defender_cost = 0.0;   // c_d
  double f_score = 0.0;
  double p_claim = 0.0;
  double p_abstain = 0.0;
};

double f_score(const MetricWeights& w, double p_sell, double hold_time, double defender_cost,
               const GameConfig& cfg);

/// Exact metrics by pushing probability mass from (0,0,0) through the chain
/// the policy induces, tracking the slot of the first share.
MetricsReport forward_metrics(const GameConfig& cfg, const AttackerParams& params,
                              const RewardSpec& spec, const Policy& policy,
                              const MetricsOptions& options = {});

struct MonteCarloEstimate {
  MetricsReport report;
  // Standard errors of the sample means.
  double se_p_sell = 0.0;
  double se_p_claim = 0.0;
  double se_hold_time = 0.0;
  double se_defender_cost = 0.0;
  std::uint64_t trajectories = 0;
};

/// Seeded trajectory sampling under the same law. Trajectories are split into
/// fixed blocks with derived seeds so the result does not depend on `jobs`.
MonteCarloEstimate monte_carlo_estimate(const GameConfig& cfg, const AttackerParams& params,
                                        const RewardSpec& spec, const Policy& policy,
                                        std::uint64_t n_traj, std::uint64_t seed,
                                        const MetricsOptions& options = {}, int jobs = 1);

MetricsReport monte_carlo_metrics(const GameConfig& cfg, const AttackerParams& params,
                                  const RewardSpec& spec, const Policy& policy,
                                  std::uint64_t n_traj, std::uint64_t seed,
                                  const MetricsOptions& options = {});

/// Expected insurance/bounty payout: sum of R_i(1, 0) * p_i.
double expected_claim_cost(const std::vector<std::pair<double, double>>& users);

/// Per-epoch fee (1 + ln(lambda) ln(ln(lambda))) * mu + c_o. Needs lambda > e.
double service_fee(double mu, double op_cost, double lambda);

/// "p_e,t_h,c_d,f,p_claim,p_abstain"
std::string metrics_csv_header();
std::string metrics_csv_row(const MetricsReport& report);
nlohmann::ordered_json to_json(const MetricsReport& report);

}  // namespace bountylab
