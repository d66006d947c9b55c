#pragma once

#include "gridci/error.hpp"
#include "gridci/timeutil.hpp"
#include "gridci/grid.hpp"
#include "gridci/attribution.hpp"
#include "gridci/optimizers.hpp"
#include "gridci/evaluation.hpp"
#include "gridci/dataio.hpp"
#include "gridci/workload_io.hpp"
#include "gridci/report.hpp"
