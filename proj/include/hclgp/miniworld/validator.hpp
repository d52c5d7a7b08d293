#pragma once

#include <memory>
#include <string>

#include "hclgp/lang/validator.hpp"
#include "hclgp/miniworld/scenario.hpp"

namespace hclgp::miniworld {

// Executor bound to one mutable world state; one per validation.
class WorldExecutor : public lang::ApiExecutor {
 public:
  explicit WorldExecutor(WorldState state) : state_(std::move(state)) {}
  lang::ApiResult call(const std::string& app, const std::string& api,
                       const Record& args) override;
  const WorldState& state() const { return state_; }

 private:
  WorldState state_;
};

class MiniWorld : public lang::Validator {
 public:
  explicit MiniWorld(std::shared_ptr<const ScenarioPack> pack);

  // Throws Error for an unknown seed.
  WorldState reset(const TaskInstance& task) const;

  ValidationOutcome validate(const Plan& plan, const TaskInstance& task,
                             const lang::ComponentResolver& resolver) const override;

  const ScenarioPack& pack() const { return *pack_; }

 private:
  std::shared_ptr<const ScenarioPack> pack_;
};

// Re-applies a recorded trace from `initial`; errored records are skipped
// since they never changed the state.
WorldState replay(const WorldState& initial,
                  const std::vector<ApiCallRecord>& trace);

// Plain-text listing of apps, apis and scenarios.
std::string describe(const ScenarioPack& pack);

}  // namespace hclgp::miniworld
