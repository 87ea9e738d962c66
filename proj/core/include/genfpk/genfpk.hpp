#pragma once

#include "genfpk/analytic.hpp"
#include "genfpk/coefficients.hpp"
#include "genfpk/errors.hpp"
#include "genfpk/history.hpp"
#include "genfpk/io.hpp"
#include "genfpk/linear_solver.hpp"
#include "genfpk/model.hpp"
#include "genfpk/montecarlo.hpp"
#include "genfpk/pufem.hpp"
#include "genfpk/quadrature.hpp"
#include "genfpk/solver.hpp"
