#include "hclgp/miniworld/validator.hpp"

#include <sstream>

namespace hclgp::miniworld {

lang::ApiResult WorldExecutor::call(const std::string& app,
                                    const std::string& api, const Record& args) {
  ApplyResult r = apply_api(state_, app, api, args);
  if (!r.ok()) return lang::ApiResult::fail(*r.error);
  state_ = std::move(r.state);
  return lang::ApiResult::ok(std::move(r.response));
}

MiniWorld::MiniWorld(std::shared_ptr<const ScenarioPack> pack)
    : pack_(std::move(pack)) {
  if (!pack_) throw Error("MiniWorld needs a scenario pack");
}

WorldState MiniWorld::reset(const TaskInstance& task) const {
  return pack_->initial_state(task.initial_state_seed);
}

ValidationOutcome MiniWorld::validate(const Plan& plan, const TaskInstance& task,
                                      const lang::ComponentResolver& resolver) const {
  ValidationOutcome out;
  out.task_id = task.id;
  WorldExecutor executor(reset(task));
  lang::ExecutionTrace trace = lang::execute(plan, executor, resolver);
  out.trace = std::move(trace.records);
  if (!trace.completed()) {
    out.error = "statement " + std::to_string(trace.error_statement) + ": " +
                trace.error_message;
  }
  for (const auto& goal : task.goal_tests) {
    if (!evaluate_goal(executor.state(), goal.predicate)) {
      out.failed_tests.push_back(goal.name);
    }
  }
  out.passed = trace.completed() && out.failed_tests.empty();
  return out;
}

WorldState replay(const WorldState& initial,
                  const std::vector<ApiCallRecord>& trace) {
  WorldState state = initial;
  for (const auto& rec : trace) {
    if (rec.error) continue;
    ApplyResult r = apply_api(state, rec.app, rec.api, rec.args);
    if (!r.ok()) throw Error("replay diverged at " + rec.app + "::" + rec.api);
    state = std::move(r.state);
  }
  return state;
}

std::string describe(const ScenarioPack& pack) {
  std::ostringstream os;
  os << "apps:\n";
  std::string app;
  for (const auto& doc : api_docs()) {
    if (doc.app != app) {
      app = doc.app;
      os << "  " << app << (is_public_app(app) ? " (public)" : "") << "\n";
    }
    os << "    " << doc.api << "(";
    for (size_t i = 0; i < doc.params.size(); ++i) {
      const auto& p = doc.params[i];
      os << (i ? ", " : "") << p.name << ": " << p.type << (p.required ? "" : "?");
    }
    os << ")  " << doc.description << "\n";
  }
  os << "scenarios:\n";
  for (const auto& sd : pack.domains) {
    os << "  " << sd.domain.id << " [" << sd.phase
       << (sd.challenge ? ", challenge" : "") << "] " << sd.domain.tasks.size()
       << " tasks: " << sd.domain.description << "\n";
  }
  return os.str();
}

}  // namespace hclgp::miniworld
