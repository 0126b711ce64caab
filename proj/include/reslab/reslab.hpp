#pragma once

#include "asymptotics.hpp"
#include "common.hpp"
#include "determinant.hpp"
#include "fit.hpp"
#include "hypotheses.hpp"
#include "io.hpp"
#include "jost.hpp"
#include "parallel.hpp"
#include "potential.hpp"
#include "quadrature.hpp"
#include "rootfinder.hpp"

namespace reslab {

inline constexpr const char* version = "reslab 0.1.0";

}  // namespace reslab
