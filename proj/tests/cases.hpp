#pragma once

// The validated two-solution parameter sets live with the acceptance suite;
// unit tests reuse them under a short alias.

#include "gpe/acceptance.hpp"

namespace cases {
using gpe::acceptance::case_22;
using gpe::acceptance::case_2b;
using gpe::acceptance::case_b2;
using gpe::acceptance::case_bb;
using gpe::acceptance::critical_case;
using gpe::acceptance::TwoSolutionCase;
}  // namespace cases
