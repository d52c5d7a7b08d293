#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hclgp/llm/gateway.hpp"
#include "hclgp/orchestrator/orchestrator.hpp"

namespace hclgp::metrics {

struct Coverage {
  int tasks = 0;
  int tasks_passed = 0;
  int domains = 0;
  int domains_solved = 0;
  double tgc_pct = 0;
  double sgc_pct = 0;
};

// Throws Error on an empty result list.
Coverage tgc_sgc(const std::vector<orchestrator::DomainResult>& results);

struct CurvePoint {
  double x = 0;
  double y = 0;
  friend bool operator==(const CurvePoint&, const CurvePoint&) = default;
};

// Starts at (0, 0), then one point per global iteration value reached in the
// log: y is the fraction of `domain_count` domains solved once every event at
// that iteration has been replayed. Empty for an empty suite.
std::vector<CurvePoint> anytime_curve(const std::vector<orchestrator::RunEvent>& events,
                                      std::size_t domain_count);

// Same points with x = priced cumulative tokens of the last event at each
// iteration. Points whose cost did not move are folded into the previous one.
// Throws Error when pricing is missing or negative.
std::vector<CurvePoint> cost_curve(const std::vector<orchestrator::RunEvent>& events,
                                   std::size_t domain_count,
                                   const std::optional<llm::Pricing>& pricing);

// Files written to `dir` (created if needed):
//   summary.csv, domains.csv, curve_anytime.csv, curve_cost.csv, usage.csv,
//   summary.txt and suite.json (the full report, readable by load_suite).
// Throws Error when the directory cannot be written.
std::vector<std::string> emit_reports(const std::string& dir,
                                      const orchestrator::SuiteReport& report);

orchestrator::SuiteReport load_suite(const std::string& path);

}  // namespace hclgp::metrics
