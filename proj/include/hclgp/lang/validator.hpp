#pragma once

#include <vector>

#include "hclgp/core/model.hpp"
#include "hclgp/lang/interpreter.hpp"

namespace hclgp::lang {

// Executes a plan from a task's initial state and checks its goal tests.
// Implementations must be safe to call concurrently for different tasks.
class Validator {
 public:
  virtual ~Validator() = default;
  virtual ValidationOutcome validate(const Plan& plan, const TaskInstance& task,
                                     const ComponentResolver& resolver) const = 0;
};

// Instantiates the policy with each task's binding and validates it; one
// outcome per task in domain order. A missing or ill-typed binding fails
// that task without running it.
std::vector<ValidationOutcome> validate_policy(const Policy& policy,
                                               const std::vector<ParameterBinding>& bindings,
                                               const Domain& domain, const Validator& validator,
                                               const ComponentResolver& resolver);

bool all_passed(const std::vector<ValidationOutcome>& outcomes);

}  // namespace hclgp::lang
