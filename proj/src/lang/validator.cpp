#include "hclgp/lang/validator.hpp"

#include <algorithm>

#include "hclgp/lang/instantiate.hpp"

namespace hclgp::lang {

std::vector<ValidationOutcome> validate_policy(const Policy& policy,
                                               const std::vector<ParameterBinding>& bindings,
                                               const Domain& domain, const Validator& validator,
                                               const ComponentResolver& resolver) {
  std::vector<ValidationOutcome> out;
  for (const auto& task : domain.tasks) {
    auto it = std::find_if(bindings.begin(), bindings.end(),
                           [&](const ParameterBinding& b) { return b.task_id == task.id; });
    ValidationOutcome failed;
    failed.task_id = task.id;
    if (it == bindings.end()) {
      failed.error = "no parameter binding for task " + task.id;
      out.push_back(failed);
      continue;
    }
    Plan plan;
    try {
      plan = instantiate(policy, *it);
    } catch (const Error& e) {
      failed.error = std::string("instantiation failed: ") + e.what();
      out.push_back(failed);
      continue;
    }
    out.push_back(validator.validate(plan, task, resolver));
  }
  return out;
}

bool all_passed(const std::vector<ValidationOutcome>& outcomes) {
  return std::all_of(outcomes.begin(), outcomes.end(),
                     [](const ValidationOutcome& o) { return o.passed; });
}

}  // namespace hclgp::lang
