#pragma once

#include <functional>
#include <string>

namespace qbat {

/// Fast invariant suite: analytic oracles, trace and Hermiticity of the
/// generator, steady state, energetics and backend agreement. Each check
/// emits one "PASS name: detail" or "FAIL name: detail" line. Returns the
/// number of failures.
int run_self_checks(const std::function<void(const std::string&)>& sink);

}  // namespace qbat
