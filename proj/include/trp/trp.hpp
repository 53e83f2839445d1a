#pragma once

// Umbrella include for the full toolkit.

#include "trp/matrix.hpp"
#include "trp/model.hpp"
#include "trp/propagate.hpp"
#include "trp/symmetrize.hpp"
#include "trp/gates.hpp"
#include "trp/metrics.hpp"
#include "trp/optimize.hpp"
#include "trp/record.hpp"
#include "trp/runner.hpp"
#include "trp/presets.hpp"
