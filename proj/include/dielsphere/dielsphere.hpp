#pragma once

#include "dielsphere/analysis.hpp"
#include "dielsphere/coefficients.hpp"
#include "dielsphere/coords.hpp"
#include "dielsphere/error.hpp"
#include "dielsphere/expansions.hpp"
#include "dielsphere/legendre.hpp"
#include "dielsphere/oracle.hpp"
#include "dielsphere/quadrature.hpp"
#include "dielsphere/series.hpp"
