#include "sieve/protocol/validate.hpp"

#include <algorithm>

#include "sieve/errors.hpp"
#include "sieve/protocol/step_plan.hpp"

namespace sieve::protocol {

namespace {

std::string where(std::size_t i, const ProtocolStep& s) {
  return "step " + std::to_string(i) + " (" + std::string(action_name(s.action)) + "): ";
}

}  // namespace

ValidationReport validate_script(const ProtocolScript& script, const mech::MachineState& initial,
                                 const hal::HalConfig& hal) {
  ValidationReport r;
  if (script.steps.empty()) r.violations.push_back("EmptyScript: no steps");
  if (script.expected_total_ms != script.sum_ms()) {
    r.violations.push_back("expected_total_ms " + std::to_string(script.expected_total_ms) +
                           " differs from the step sum " + std::to_string(script.sum_ms()));
  }
  const bool grinds = std::any_of(script.steps.begin(), script.steps.end(), [](const ProtocolStep& s) {
    return std::holds_alternative<action::Grind>(s.action);
  });
  if ((script.name == ScriptName::EggExtraction || script.name == ScriptName::FullExtraction) && !grinds) {
    r.violations.push_back("EmptyGrind: egg extraction without a grind cycle");
  }

  auto state = initial;
  for (std::size_t i = 0; i < script.steps.size(); ++i) {
    const auto& step = script.steps[i];
    if (step.duration_ms < 0) {
      r.violations.push_back(where(i, step) + "negative duration");
      continue;
    }
    try {
      const auto plan = plan_step(step, state, hal);
      if (plan.busy_ms() > step.duration_ms) {
        r.violations.push_back(where(i, step) + "allocation of " + std::to_string(step.duration_ms) +
                               " ms is shorter than its " + std::to_string(plan.busy_ms()) + " ms of work");
      }
      state = apply_mechanics(plan, state);
    } catch (const mech::MechanismError& e) {
      r.violations.push_back(where(i, step) + e.what());
      break;
    } catch (const DomainError& e) {
      r.violations.push_back(where(i, step) + e.what());
      break;
    } catch (const ConfigError& e) {
      r.violations.push_back(where(i, step) + e.what());
      break;
    }
    for (const auto& v : mech::check_invariants(state)) r.violations.push_back(where(i, step) + v);
  }
  return r;
}

}  // namespace sieve::protocol
