#pragma once

#include "dtnspeed/disjoint_set.hpp"
#include "dtnspeed/experiment.hpp"
#include "dtnspeed/kernel.hpp"
#include "dtnspeed/sim.hpp"
#include "dtnspeed/specfun.hpp"
#include "dtnspeed/stats.hpp"
