#include <algorithm>
#include <random>
#include <sstream>

#include "doctest.h"

#include "bountylab/errors.hpp"
#include "bountylab/optimizer.hpp"
#include "bountylab/report.hpp"

using namespace bountylab;

namespace {

GameConfig reference_cfg(int horizon = 30) {
  return GameConfig{3, 3, horizon, 6.0, ValueVariant::LinearCapped, false};
}

}  // namespace

TEST_CASE("epsilon grid") {
  const auto g = epsilon_grid(0.01);
  REQUIRE(g.size() == 101);
  CHECK(g.front() == 0.0);
  CHECK(g.back() == 1.0);
  CHECK(g[95] == 0.95);
  CHECK(epsilon_grid(0.5) == std::vector<double>{0.0, 0.5, 1.0});
  CHECK_THROWS_AS(epsilon_grid(0.3), ConfigError);
  CHECK_THROWS_AS(epsilon_grid(0.0), ConfigError);
}

TEST_CASE("optimizer reports the f it would recompute") {
  const auto cfg = reference_cfg(10);
  const AttackerParams est{0.4, 0.4};
  const auto opt = optimize_epsilon(cfg, est, 0.8, default_bonus(cfg), 0.05);
  REQUIRE(opt.trace.size() == 21);
  const RewardSpec spec = capped_proposed(opt.epsilon_star, default_bonus(cfg), 0.8);
  const auto sol = solve(cfg, est, spec);
  CHECK(forward_metrics(cfg, est, spec, sol.policy).f_score == opt.f_star);
  for (const auto& p : opt.trace) CHECK(p.report.f_score >= opt.f_star - 1e-12);
  // Largest minimizer.
  for (const auto& p : opt.trace) {
    if (p.epsilon > opt.epsilon_star) CHECK(p.report.f_score > opt.f_star + 1e-12);
  }
}

TEST_CASE("optimizer tie-break and grid membership") {
  const auto cfg = reference_cfg(10);
  const auto idle = optimize_epsilon(cfg, AttackerParams{50.0, 0.4}, 0.8, 0.06, 0.1);
  CHECK(idle.epsilon_star == 1.0);
  CHECK(idle.f_star == 0.0);
  for (const auto& p : idle.trace) CHECK(p.report.f_score == 0.0);

  const auto coarse = optimize_epsilon(cfg, AttackerParams{0.4, 0.4}, 0.8, 0.06, 0.5);
  CHECK((coarse.epsilon_star == 0.0 || coarse.epsilon_star == 0.5 || coarse.epsilon_star == 1.0));
}

TEST_CASE("reference instance: optimized f stays below 0.3") {
  const auto cfg = reference_cfg();
  const auto opt = optimize_epsilon(cfg, AttackerParams{0.4, 0.4}, 0.8, default_bonus(cfg), 0.01);
  CHECK(opt.f_star <= 0.3);
  CHECK(opt.epsilon_star >= 0.0);
  CHECK(opt.epsilon_star <= 1.0);
}

TEST_CASE("sweep grid normalization") {
  SweepGrid g{{0.3, 0.1, 0.3}, {1.0, 0.5}, {"zero", "proposed", "zero"}};
  const auto n = g.normalized();
  CHECK(n.ca_values == std::vector<double>{0.1, 0.3});
  CHECK(n.ps_values == std::vector<double>{0.5, 1.0});
  CHECK(n.specs == std::vector<std::string>{"zero", "proposed"});
  CHECK_THROWS_AS((SweepGrid{{}, {0.5}, {"zero"}}.normalized()), ConfigError);
  CHECK_THROWS_AS((SweepGrid{{0.1}, {1.5}, {"zero"}}.normalized()), ConfigError);
  CHECK_THROWS_AS((SweepGrid{{0.1}, {0.5}, {"quadratic"}}.normalized()), ConfigError);
  const auto d = SweepGrid::default_grid();
  CHECK(d.ca_values.size() == 10);
  CHECK(d.ps_values.front() == 0.1);
  CHECK(d.ps_values.back() == 1.0);
}

TEST_CASE("one-cell sweep equals the optimizer's f*") {
  const auto cfg = reference_cfg(10);
  const auto opt = optimize_epsilon(cfg, AttackerParams{0.4, 0.4}, 0.8, default_bonus(cfg), 0.05);
  const auto table = sweep(cfg, opt.epsilon_star, SweepGrid{{0.4}, {0.4}, {"proposed"}});
  CHECK(table.cell(0, 0, 0).f_score == opt.f_star);
  CHECK(table.dominance_count() == 1);
}

TEST_CASE("sweep is invariant under axis permutations and thread count") {
  const auto cfg = reference_cfg(12);
  SweepGrid g{{0.1, 0.4, 0.7, 1.0}, {0.2, 0.5, 0.9}, {"proposed", "linear", "zero", "constant:3"}};
  const auto base = sweep(cfg, 0.9, g);
  std::mt19937_64 rng(12);
  for (int round = 0; round < 3; ++round) {
    SweepGrid shuffled = g;
    std::shuffle(shuffled.ca_values.begin(), shuffled.ca_values.end(), rng);
    std::shuffle(shuffled.ps_values.begin(), shuffled.ps_values.end(), rng);
    SweepSettings settings;
    settings.jobs = 1 + round;
    const auto other = sweep(cfg, 0.9, shuffled, settings);
    for (const auto& s : g.specs) {
      for (double ca : g.ca_values) {
        for (double ps : g.ps_values) {
          CHECK(other.at(s, ca, ps).f_score == base.at(s, ca, ps).f_score);
          CHECK(other.at(s, ca, ps).defender_cost == base.at(s, ca, ps).defender_cost);
        }
      }
    }
  }
  std::ostringstream a, b;
  write_sweep_csv(a, base);
  SweepSettings four;
  four.jobs = 4;
  write_sweep_csv(b, sweep(cfg, 0.9, g, four));
  CHECK(a.str() == b.str());
}

TEST_CASE("dominance mask") {
  const auto cfg = reference_cfg(8);
  const auto table = sweep(cfg, 0.9, SweepGrid{{0.2, 0.6}, {0.3, 0.8}, {"proposed", "zero"}});
  std::size_t manual = 0;
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      const bool expect = table.cell(0, i, j).f_score <= table.cell(1, i, j).f_score + 1e-12;
      CHECK(table.dominates(i, j) == expect);
      manual += expect;
    }
  }
  CHECK(table.dominance_count() == manual);
  const auto no_proposed = sweep(cfg, 0.9, SweepGrid{{0.2}, {0.3}, {"zero"}});
  CHECK_THROWS_AS(no_proposed.dominates(0, 0), DomainError);
}

TEST_CASE("without a bounty, p_e and c_d weakly decrease in attack cost") {
  const auto cfg = reference_cfg();
  const auto table = sweep(cfg, 0.95, SweepGrid{SweepGrid::default_grid().ca_values,
                                                 SweepGrid::default_grid().ps_values, {"zero"}});
  const auto& g = table.grid();
  for (std::size_t j = 0; j < g.ps_values.size(); ++j) {
    for (std::size_t i = 1; i < g.ca_values.size(); ++i) {
      CHECK(table.cell(0, i, j).p_sell <= table.cell(0, i - 1, j).p_sell + 1e-12);
      CHECK(table.cell(0, i, j).defender_cost <= table.cell(0, i - 1, j).defender_cost + 1e-12);
    }
  }
}

// Registered as its own ctest entry (zero_spec_f_monotone).
TEST_CASE("without a bounty, f weakly decreases in attack cost" * doctest::skip()) {
  const auto cfg = reference_cfg();
  const auto table = sweep(cfg, 0.95, SweepGrid{SweepGrid::default_grid().ca_values,
                                                 SweepGrid::default_grid().ps_values, {"zero"}});
  const auto& g = table.grid();
  for (std::size_t j = 0; j < g.ps_values.size(); ++j) {
    for (std::size_t i = 1; i < g.ca_values.size(); ++i) {
      CHECK(table.cell(0, i, j).f_score <= table.cell(0, i - 1, j).f_score + 1e-12);
    }
  }
}

TEST_CASE("case-study cost model") {
  const auto m = case_study_params(4096, Money::parse("230"), Money::parse("97.9"), 36000, 10, 20, 30);
  CHECK(m.days_per_share == Rational::make(4096, 230));
  CHECK(m.days_per_share == Rational{2048, 115});
  CHECK(m.days_per_share.to_double() == doctest::Approx(17.808695652173913));
  CHECK(m.days_per_share * m.tx_per_day == Rational{4096, 1});
  // 97.9 * 10 * 4096 / 230 = 17434.71304347..., rounded to micro-units.
  CHECK(m.key_cost() == Money::parse("17434.713043"));
  CHECK(m.key_cost().to_double() >= 17400.0);
  CHECK(m.key_cost().to_double() <= 17450.0);
  CHECK(share_value(m.game, 4) == 14400.0);
  for (int k = 0; k <= 20; ++k) {
    CHECK(std::abs((m.cost(k) - Money::from_micros(m.cost(1).micros() * k)).micros()) <= k);
  }

  const auto unit = case_study_params(500, Money::parse("500"), Money::parse("3"), 100, 2, 3, 10);
  CHECK(unit.days_per_share == Rational{1, 1});
  CHECK(unit.cost(3) == Money::parse("9"));
  const auto free = case_study_params(4096, Money::parse("230"), Money{}, 36000, 10, 20, 30);
  for (int k = 0; k <= 20; ++k) CHECK(free.cost(k) == Money{});
  CHECK_THROWS_AS(case_study_params(4096, Money{}, Money::parse("1"), 36000, 10, 20, 30), DomainError);
}

TEST_CASE("report writers") {
  const auto cfg = reference_cfg(5);
  const auto table = sweep(cfg, 0.5, SweepGrid{{0.1, 0.2}, {0.5}, {"proposed", "zero"}});
  std::ostringstream csv;
  write_sweep_csv(csv, table);
  const auto text = csv.str();
  CHECK(text.rfind("spec,c_a,p_s,p_e,t_h,c_d,f\nproposed,0.1,0.5,", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 5);

  std::ostringstream svg;
  write_heatmap_svg(svg, table, "zero");
  const auto s = svg.str();
  CHECK(s.find("Color scale") != std::string::npos);
  std::size_t rects = 0;
  for (std::size_t pos = 0; (pos = s.find("<rect", pos)) != std::string::npos; ++pos) ++rects;
  CHECK(rects == 2);
  CHECK_THROWS_AS(write_heatmap_svg(svg, table, "linear"), DomainError);

  EpsilonOptimum opt;
  opt.trace = {{0.0, MetricsReport{}}, {0.5, MetricsReport{0, 0, 0, 0.25, 0, 1}}};
  std::ostringstream trace;
  write_trace_csv(trace, opt);
  CHECK(trace.str() == "epsilon,f\n0,0\n0.5,0.25\n");
}
