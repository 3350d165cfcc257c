#pragma once

// Umbrella header for the agreement library.

#include "agreement/errors.hpp"
#include "agreement/structure.hpp"
#include "agreement/divergence.hpp"
#include "agreement/partition.hpp"
#include "agreement/metrics.hpp"
#include "agreement/protocol.hpp"
#include "agreement/substitutes.hpp"
#include "agreement/analysis.hpp"
#include "agreement/corpus.hpp"
#include "agreement/io.hpp"
#include "agreement/verify.hpp"
#include "agreement/cli.hpp"
