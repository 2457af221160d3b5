#include "bountylab/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include "bountylab/errors.hpp"
#include "bountylab/mdp.hpp"

namespace bountylab {

namespace {

bool known_label(const std::string& label) {
  return label == "proposed" || label == "linear" || label == "zero" ||
         label.rfind("constant:", 0) == 0;
}

std::vector<double> sorted_unique(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace

RewardSpec capped_proposed(double epsilon, double eta, double alpha_cap) {
  return rewards::Capped{rewards::Proposed{epsilon, eta}, alpha_cap};
}

double default_bonus(const GameConfig& cfg) { return 0.01 * cfg.key_value; }

std::vector<double> epsilon_grid(double grid_step) {
  if (!(grid_step > 0.0 && grid_step <= 1.0)) throw ConfigError("grid step must lie in (0, 1]");
  const double intervals = std::round(1.0 / grid_step);
  if (std::abs(intervals * grid_step - 1.0) > 1e-9) throw ConfigError("grid step must divide 1");
  const auto n = static_cast<int>(intervals);
  std::vector<double> grid;
  for (int i = 0; i <= n; ++i) grid.push_back(static_cast<double>(i) / n);
  return grid;
}

EpsilonOptimum optimize_epsilon(const GameConfig& cfg, const AttackerParams& est_params,
                                double alpha_cap, double eta, double grid_step,
                                const MetricsOptions& metrics) {
  cfg.validate();
  est_params.validate();
  metrics.weights.validate();
  EpsilonOptimum out;
  double best = INFINITY;
  for (double eps : epsilon_grid(grid_step)) {
    const RewardSpec spec = capped_proposed(eps, eta, alpha_cap);
    validate(spec);
    const Solution sol = solve(cfg, est_params, spec);
    const MetricsReport report = forward_metrics(cfg, est_params, spec, sol.policy, metrics);
    out.trace.push_back({eps, report});
    // Ascending scan: a tie moves the optimum to the larger epsilon.
    if (report.f_score <= best + 1e-12) {
      best = std::min(best, report.f_score);
      out.epsilon_star = eps;
      out.f_star = report.f_score;
    }
  }
  return out;
}

SweepGrid SweepGrid::default_grid() {
  SweepGrid g;
  for (int i = 1; i <= 10; ++i) {
    g.ca_values.push_back(i / 10.0);
    g.ps_values.push_back(i / 10.0);
  }
  g.specs = {"proposed", "linear", "zero"};
  return g;
}

SweepGrid SweepGrid::normalized() const {
  if (ca_values.empty() || ps_values.empty() || specs.empty()) {
    throw ConfigError("sweep grid axes must be non-empty");
  }
  SweepGrid g;
  g.ca_values = sorted_unique(ca_values);
  g.ps_values = sorted_unique(ps_values);
  for (double ca : g.ca_values) {
    if (!(ca >= 0.0)) throw ConfigError("c_a values must be >= 0");
  }
  for (double ps : g.ps_values) {
    if (!(ps >= 0.0 && ps <= 1.0)) throw ConfigError("p_s values must lie in [0, 1]");
  }
  for (const auto& s : specs) {
    if (!known_label(s)) throw ConfigError("unknown sweep spec: " + s);
    if (std::find(g.specs.begin(), g.specs.end(), s) == g.specs.end()) g.specs.push_back(s);
  }
  return g;
}

RewardSpec sweep_reward(const std::string& label, const GameConfig& cfg, double epsilon_star,
                        const SweepSettings& settings) {
  const double eta = settings.eta < 0 ? default_bonus(cfg) : settings.eta;
  if (label == "proposed") return capped_proposed(epsilon_star, eta, settings.alpha_cap);
  if (label == "linear") {
    return rewards::Linear{settings.linear_bonus < 0 ? default_bonus(cfg) : settings.linear_bonus,
                          settings.linear_time_bonus < 0 ? default_bonus(cfg)
                                                         : settings.linear_time_bonus};
  }
  if (label == "zero") return rewards::Zero{};
  if (label.rfind("constant:", 0) == 0) {
    return rewards::Constant{std::stod(label.substr(9))};
  }
  throw ConfigError("unknown sweep spec: " + label);
}

SweepTable::SweepTable(GameConfig cfg, double epsilon_star, SweepGrid grid, MetricWeights weights)
    : cfg_(cfg), epsilon_star_(epsilon_star), grid_(std::move(grid)), weights_(weights),
      cells_(grid_.specs.size() * grid_.ca_values.size() * grid_.ps_values.size()) {}

std::size_t SweepTable::offset(std::size_t spec, std::size_t ca, std::size_t ps) const {
  if (spec >= grid_.specs.size() || ca >= grid_.ca_values.size() || ps >= grid_.ps_values.size()) {
    throw DomainError("sweep cell index out of range");
  }
  return (spec * grid_.ca_values.size() + ca) * grid_.ps_values.size() + ps;
}

const MetricsReport& SweepTable::cell(std::size_t spec, std::size_t ca, std::size_t ps) const {
  return cells_[offset(spec, ca, ps)];
}

MetricsReport& SweepTable::cell(std::size_t spec, std::size_t ca, std::size_t ps) {
  return cells_[offset(spec, ca, ps)];
}

const MetricsReport& SweepTable::at(const std::string& spec, double ca, double ps) const {
  auto find = [](const auto& axis, const auto& value) -> std::size_t {
    const auto it = std::find(axis.begin(), axis.end(), value);
    if (it == axis.end()) throw DomainError("value not on the sweep grid");
    return static_cast<std::size_t>(it - axis.begin());
  };
  return cell(find(grid_.specs, spec), find(grid_.ca_values, ca), find(grid_.ps_values, ps));
}

bool SweepTable::dominates(std::size_t ca, std::size_t ps) const {
  const auto it = std::find(grid_.specs.begin(), grid_.specs.end(), "proposed");
  if (it == grid_.specs.end()) throw DomainError("sweep has no proposed spec");
  const auto p = static_cast<std::size_t>(it - grid_.specs.begin());
  const double fp = cell(p, ca, ps).f_score;
  for (std::size_t s = 0; s < grid_.specs.size(); ++s) {
    if (s != p && fp > cell(s, ca, ps).f_score + 1e-12) return false;
  }
  return true;
}

std::size_t SweepTable::dominance_count() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < grid_.ca_values.size(); ++i) {
    for (std::size_t j = 0; j < grid_.ps_values.size(); ++j) n += dominates(i, j) ? 1 : 0;
  }
  return n;
}

SweepTable sweep(const GameConfig& cfg, double epsilon_star, const SweepGrid& grid,
                 const SweepSettings& settings) {
  cfg.validate();
  settings.metrics.weights.validate();
  if (!(epsilon_star >= 0.0 && epsilon_star <= 1.0)) throw ConfigError("epsilon* must lie in [0, 1]");
  SweepTable table(cfg, epsilon_star, grid.normalized(), settings.metrics.weights);
  const auto& g = table.grid();

  std::vector<RewardSpec> specs;
  for (const auto& label : g.specs) {
    specs.push_back(sweep_reward(label, cfg, epsilon_star, settings));
    validate(specs.back());
  }
  const std::size_t total = specs.size() * g.ca_values.size() * g.ps_values.size();
  auto run = [&](std::size_t flat) {
    const std::size_t ps = flat % g.ps_values.size();
    const std::size_t ca = (flat / g.ps_values.size()) % g.ca_values.size();
    const std::size_t s = flat / (g.ps_values.size() * g.ca_values.size());
    const AttackerParams params{g.ca_values[ca], g.ps_values[ps]};
    const Solution sol = solve(cfg, params, specs[s]);
    table.cell(s, ca, ps) = forward_metrics(cfg, params, specs[s], sol.policy, settings.metrics);
  };
  const auto workers = static_cast<std::size_t>(std::max(1, settings.jobs));
  if (workers == 1) {
    for (std::size_t i = 0; i < total; ++i) run(i);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < total; i += workers) run(i);
      });
    }
    for (auto& th : pool) th.join();
  }
  return table;
}

Rational Rational::make(std::int64_t num, std::int64_t den) {
  if (den == 0) throw DomainError("zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const std::int64_t g = std::gcd(num, den);
  return {num / (g == 0 ? 1 : g), den / (g == 0 ? 1 : g)};
}

Rational operator*(const Rational& a, const Rational& b) {
  const std::int64_t g1 = std::gcd(a.num, b.den);
  const std::int64_t g2 = std::gcd(b.num, a.den);
  const std::int64_t d1 = g1 == 0 ? 1 : g1;
  const std::int64_t d2 = g2 == 0 ? 1 : g2;
  return Rational::make((a.num / d1) * (b.num / d2), (a.den / d2) * (b.den / d1));
}

CaseStudyModel case_study_params(std::int64_t traces, Money tx_per_day, Money cloud_cost,
                                 double key_value, int threshold, int n_shares, int horizon_days) {
  if (tx_per_day.micros() == 0) throw DomainError("tx_per_day must be non-zero");
  if (traces <= 0 || tx_per_day < Money{} || cloud_cost < Money{} || !(key_value > 0.0) ||
      threshold <= 0 || n_shares <= 0 || horizon_days <= 0) {
    throw DomainError("case-study parameters must be positive");
  }
  GameConfig game{n_shares, threshold, horizon_days, key_value, ValueVariant::CeilCapped, false};
  game.validate();
  const Rational rate = Rational::make(tx_per_day.micros(), Money::kScale);
  const Rational days = Rational::make(traces, 1) * Rational::make(rate.den, rate.num);
  std::vector<Money> table;
  for (int k = 0; k <= n_shares; ++k) {
    // cloud_cost * k * days, rounded half-up to micro-units.
    const __int128 num = static_cast<__int128>(cloud_cost.micros()) * k * days.num;
    const __int128 rounded = (2 * num + days.den) / (2 * static_cast<__int128>(days.den));
    table.push_back(Money::from_micros(static_cast<std::int64_t>(rounded)));
  }
  return CaseStudyModel{traces, rate, days, cloud_cost, game, DeterministicCost(std::move(table))};
}

}  // namespace bountylab
