#pragma once

#include "propint/data_io.hpp"
#include "propint/intervals.hpp"
#include "propint/planning.hpp"
#include "propint/quantiles.hpp"
#include "propint/rng.hpp"
#include "propint/simulation.hpp"
#include "propint/types.hpp"
