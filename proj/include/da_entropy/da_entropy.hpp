#pragma once

#include "da_entropy/da_engine.hpp"
#include "da_entropy/diagnostics.hpp"
#include "da_entropy/dist_core.hpp"
#include "da_entropy/errors.hpp"
#include "da_entropy/ext_real.hpp"
#include "da_entropy/info_metrics.hpp"
#include "da_entropy/io.hpp"
#include "da_entropy/mc_sampler.hpp"
