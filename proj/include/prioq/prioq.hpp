#pragma once

#include "prioq/analytics.hpp"
#include "prioq/csv_io.hpp"
#include "prioq/estimate.hpp"
#include "prioq/experiment.hpp"
#include "prioq/extended_real.hpp"
#include "prioq/oracle.hpp"
#include "prioq/random.hpp"
#include "prioq/registry.hpp"
#include "prioq/simulate.hpp"
