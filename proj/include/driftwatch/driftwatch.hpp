#pragma once

// Umbrella header: the whole library in one include.

#include "driftwatch/alerting.hpp"
#include "driftwatch/baselines.hpp"
#include "driftwatch/common.hpp"
#include "driftwatch/config.hpp"
#include "driftwatch/dates.hpp"
#include "driftwatch/metrics.hpp"
#include "driftwatch/numeric.hpp"
#include "driftwatch/parse.hpp"
#include "driftwatch/pipeline.hpp"
#include "driftwatch/record.hpp"
#include "driftwatch/rng.hpp"
#include "driftwatch/stats.hpp"
#include "driftwatch/synth.hpp"
#include "driftwatch/temporal.hpp"
