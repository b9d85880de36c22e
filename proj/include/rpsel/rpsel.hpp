#pragma once

#include "rpsel/calibrate.hpp"
#include "rpsel/config.hpp"
#include "rpsel/core.hpp"
#include "rpsel/csvio.hpp"
#include "rpsel/market.hpp"
#include "rpsel/normal.hpp"
#include "rpsel/oracles.hpp"
#include "rpsel/pde.hpp"
#include "rpsel/quadrature.hpp"
#include "rpsel/rng.hpp"
#include "rpsel/simulate.hpp"
#include "rpsel/strategy.hpp"
