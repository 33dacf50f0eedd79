// Umbrella header.
#pragma once

#include "doh/approx.hpp"
#include "doh/bench.hpp"
#include "doh/core.hpp"
#include "doh/dispatch.hpp"
#include "doh/exact_dp.hpp"
#include "doh/heuristics.hpp"
#include "doh/io.hpp"
#include "doh/oracle.hpp"
#include "doh/special.hpp"
