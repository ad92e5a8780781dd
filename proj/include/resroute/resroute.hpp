#pragma once

// Umbrella header for the whole library.

#include "resroute/core.hpp"
#include "resroute/formulation.hpp"
#include "resroute/mip.hpp"
#include "resroute/oracle.hpp"
#include "resroute/plan.hpp"
#include "resroute/program.hpp"
#include "resroute/report.hpp"
#include "resroute/scenario.hpp"
#include "resroute/socp.hpp"
#include "resroute/transport.hpp"
