#pragma once

#include "macpam/awgn_gap.hpp"
#include "macpam/io.hpp"
#include "macpam/region.hpp"
#include "macpam/scheduler.hpp"
#include "macpam/sim.hpp"
#include "macpam/types.hpp"
