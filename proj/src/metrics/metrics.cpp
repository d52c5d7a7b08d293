#include "hclgp/metrics/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace hclgp::metrics {

using orchestrator::RunEvent;

Coverage tgc_sgc(const std::vector<orchestrator::DomainResult>& results) {
  if (results.empty()) throw Error("tgc_sgc needs at least one domain result");
  Coverage c;
  for (const auto& r : results) {
    ++c.domains;
    bool all = !r.task_passed.empty();
    for (const auto& [task, ok] : r.task_passed) {
      ++c.tasks;
      if (ok) ++c.tasks_passed;
      all = all && ok;
    }
    if (all != r.solved) throw InvariantError("domain " + r.domain_id + " status disagrees with its tasks");
    if (r.solved) ++c.domains_solved;
  }
  c.tgc_pct = c.tasks ? 100.0 * c.tasks_passed / c.tasks : 0.0;
  c.sgc_pct = 100.0 * c.domains_solved / c.domains;
  return c;
}

namespace {

// Calls f(last_event_of_group, solved_so_far) once per iteration value.
template <typename F>
void replay(const std::vector<RunEvent>& events, F f) {
  std::set<std::string> solved;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    if (i > 0 && (e.ordinal <= events[i - 1].ordinal || e.iteration < events[i - 1].iteration)) {
      throw Error("event log is out of order at ordinal " + std::to_string(e.ordinal));
    }
    if (e.kind == RunEvent::Kind::kDomainSolved) solved.insert(e.domain_id);
    bool last = i + 1 == events.size() || events[i + 1].iteration != e.iteration;
    if (last && e.iteration > 0) f(e, solved.size());
  }
}

}  // namespace

std::vector<CurvePoint> anytime_curve(const std::vector<RunEvent>& events,
                                      std::size_t domain_count) {
  std::vector<CurvePoint> out;
  if (domain_count == 0) {
    if (!events.empty()) throw Error("events given for an empty suite");
    return out;
  }
  out.push_back({0, 0});
  replay(events, [&](const RunEvent& e, std::size_t solved) {
    out.push_back({static_cast<double>(e.iteration), static_cast<double>(solved) / domain_count});
  });
  return out;
}

std::vector<CurvePoint> cost_curve(const std::vector<RunEvent>& events, std::size_t domain_count,
                                   const std::optional<llm::Pricing>& pricing) {
  if (!pricing) throw Error("cost curve needs token pricing");
  if (!(pricing->per_m_input >= 0) || !(pricing->per_m_output >= 0)) {
    throw Error("token prices must be non-negative");
  }
  std::vector<CurvePoint> out;
  if (domain_count == 0) {
    if (!events.empty()) throw Error("events given for an empty suite");
    return out;
  }
  out.push_back({0, 0});
  replay(events, [&](const RunEvent& e, std::size_t solved) {
    CurvePoint p{llm::price(e.cumulative, *pricing), static_cast<double>(solved) / domain_count};
    if (p.x == out.back().x) {
      out.back().y = p.y;
    } else {
      out.push_back(p);
    }
  });
  return out;
}

namespace {

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string pct(double v) { return fmt("%.4f", v); }
std::string usd(double v) { return fmt("%.8f", v); }

void write(const std::filesystem::path& path, const std::string& text,
           std::vector<std::string>& written) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("failed writing " + path.string());
  written.push_back(path.filename().string());
}

std::string curve_csv(const std::vector<CurvePoint>& points, const char* xspec) {
  std::string s = "x,y\n";
  for (const auto& p : points) s += fmt(xspec, p.x) + "," + fmt("%.6f", p.y) + "\n";
  return s;
}

}  // namespace

std::vector<std::string> emit_reports(const std::string& dir,
                                      const orchestrator::SuiteReport& report) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create report directory " + dir + ": " + ec.message());

  const auto pricing = llm::Pricing::from(report.config);
  const bool empty = report.results.empty();
  std::optional<Coverage> cov;
  if (!empty) cov = tgc_sgc(report.results);
  const std::size_t n = report.results.size();
  auto anytime = anytime_curve(report.events, n);
  auto costs = cost_curve(report.events, n, pricing);
  const double total_cost = llm::price(report.total_usage, pricing);
  int passes = 0;
  for (const auto& e : report.events) passes += e.kind == RunEvent::Kind::kGeneralizationPass;

  std::vector<std::string> written;
  std::string summary =
      "mode,domains,domains_solved,tasks,tasks_passed,tgc_pct,sgc_pct,total_iterations,"
      "input_tokens,output_tokens,cost_usd,generalization_passes\n";
  if (cov) {
    summary += std::string(orchestrator::mode_name(report.mode)) + "," +
               std::to_string(cov->domains) + "," + std::to_string(cov->domains_solved) + "," +
               std::to_string(cov->tasks) + "," + std::to_string(cov->tasks_passed) + "," +
               pct(cov->tgc_pct) + "," + pct(cov->sgc_pct) + "," +
               std::to_string(report.total_iterations) + "," +
               std::to_string(report.total_usage.input_tokens) + "," +
               std::to_string(report.total_usage.output_tokens) + "," + usd(total_cost) + "," +
               std::to_string(passes) + "\n";
  }
  write(fs::path(dir) / "summary.csv", summary, written);

  std::string domains =
      "domain,status,tasks_passed,tasks,iterations,revisions,input_tokens,output_tokens,cost_usd,"
      "final_policy_id,components_learned\n";
  for (const auto& r : report.results) {
    int passed = 0;
    for (const auto& [t, ok] : r.task_passed) passed += ok;
    std::string learned;
    for (const auto& id : r.components_learned) learned += (learned.empty() ? "" : ";") + id;
    domains += r.domain_id + "," + (r.solved ? "solved" : "failed") + "," +
               std::to_string(passed) + "," + std::to_string(r.task_passed.size()) + "," +
               std::to_string(r.iterations) + "," + std::to_string(r.revisions()) + "," +
               std::to_string(r.usage.input_tokens) + "," +
               std::to_string(r.usage.output_tokens) + "," + usd(llm::price(r.usage, pricing)) +
               "," + r.final_policy_id + "," + learned + "\n";
  }
  write(fs::path(dir) / "domains.csv", domains, written);
  write(fs::path(dir) / "curve_anytime.csv", curve_csv(anytime, "%.0f"), written);
  write(fs::path(dir) / "curve_cost.csv", curve_csv(costs, "%.8f"), written);

  std::string usage =
      "provenance,available,total_used,utilization_pct,per_scenario_mean,reuse_rate,"
      "multi_use_pct\n";
  for (const auto& [p, s] : report.component_usage) {
    usage += std::string(repo::provenance_name(p)) + "," + std::to_string(s.available) + "," +
             std::to_string(s.total_used) + "," + pct(s.utilization_pct) + "," +
             pct(s.per_scenario_mean) + "," + pct(s.reuse_rate) + "," + pct(s.multi_use_pct) +
             "\n";
  }
  write(fs::path(dir) / "usage.csv", usage, written);

  std::ostringstream txt;
  txt << "mode: " << orchestrator::mode_name(report.mode) << "\n";
  txt << "config: k=" << report.config.retrieval_k << " tau=" << report.config.cluster_threshold
      << " debug_budget=" << report.config.debug_budget
      << " generalization_trigger=" << report.config.generalization_trigger
      << " price_in=" << report.config.price_per_m_input
      << " price_out=" << report.config.price_per_m_output << "\n";
  if (!cov) {
    txt << "no domains\n";
  } else {
    txt << "domains solved: " << cov->domains_solved << "/" << cov->domains
        << " (SGC " << pct(cov->sgc_pct) << "%)\n";
    txt << "tasks passed: " << cov->tasks_passed << "/" << cov->tasks << " (TGC "
        << pct(cov->tgc_pct) << "%)\n";
    txt << "debugging iterations: " << report.total_iterations << "\n";
    txt << "generalization passes: " << passes << "\n";
    txt << "tokens: " << report.total_usage.input_tokens << " in, "
        << report.total_usage.output_tokens << " out, $" << usd(total_cost) << "\n";
    for (const auto& r : report.results) {
      txt << "  " << r.domain_id << ": " << (r.solved ? "solved" : "failed") << " after "
          << r.iterations << " iteration" << (r.iterations == 1 ? "" : "s") << "\n";
    }
  }
  write(fs::path(dir) / "summary.txt", txt.str(), written);

  Json full = report;
  write(fs::path(dir) / "suite.json", full.dump(2) + "\n", written);
  return written;
}

orchestrator::SuiteReport load_suite(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path);
  try {
    return Json::parse(in).get<orchestrator::SuiteReport>();
  } catch (const Json::exception& e) {
    throw Error("malformed suite report " + path + ": " + e.what());
  }
}

}  // namespace hclgp::metrics
