#pragma once

#include "errors.hpp"
#include "numeric.hpp"
#include "quadrature.hpp"
#include "fft.hpp"
#include "lattice.hpp"
#include "kernels.hpp"
#include "arithmetic.hpp"
#include "grid.hpp"
#include "expsums.hpp"
#include "fit.hpp"
#include "multipliers.hpp"
#include "operators.hpp"
#include "scans.hpp"
#include "io.hpp"
#include "experiments.hpp"
