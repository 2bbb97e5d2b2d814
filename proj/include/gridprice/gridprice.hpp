#pragma once

#include "gridprice/dcopf.hpp"
#include "gridprice/errors.hpp"
#include "gridprice/grid_model.hpp"
#include "gridprice/io.hpp"
#include "gridprice/lp.hpp"
#include "gridprice/price_dynamics.hpp"
#include "gridprice/profile.hpp"
#include "gridprice/rng.hpp"
#include "gridprice/users.hpp"
#include "gridprice/welfare_oracle.hpp"
