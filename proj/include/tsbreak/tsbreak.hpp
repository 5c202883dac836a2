#pragma once

// Convenience umbrella for the whole toolkit.

#include "tsbreak/autoencoder.hpp"
#include "tsbreak/bocpd.hpp"
#include "tsbreak/detector.hpp"
#include "tsbreak/errors.hpp"
#include "tsbreak/metrics.hpp"
#include "tsbreak/pelt.hpp"
#include "tsbreak/rng.hpp"
#include "tsbreak/serialization.hpp"
#include "tsbreak/series.hpp"
#include "tsbreak/synthgen.hpp"
#include "tsbreak/windowing.hpp"
