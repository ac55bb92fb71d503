#pragma once

#include "causal/analysis.hpp"
#include "causal/errors.hpp"
#include "causal/grid.hpp"
#include "causal/measure.hpp"
#include "causal/model.hpp"
#include "causal/monotone_cubic.hpp"
#include "causal/parallel.hpp"
#include "causal/paths.hpp"
#include "causal/reference.hpp"
#include "causal/report.hpp"
#include "causal/rng.hpp"
#include "causal/solver.hpp"
