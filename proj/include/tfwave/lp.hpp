#pragma once

#include "tfwave/rational.hpp"

#include <optional>
#include <vector>

namespace tfwave {

// Minimize c^T z subject to A z <= b, z >= 0, in exact rational arithmetic.
// Two-phase primal simplex with Bland's rule. Returns nullopt if infeasible;
// throws on unbounded problems (callers here always pose bounded ones).
std::optional<Rat> solve_lp_min(const std::vector<std::vector<Rat>>& A,
                                const std::vector<Rat>& b, const std::vector<Rat>& c);

}  // namespace tfwave
