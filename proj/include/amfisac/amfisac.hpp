// SPDX-License-Identifier: Apache-2.0
#pragma once

// Umbrella header. The command-line front end lives in amfisac/cli.hpp.

#include "amfisac/numerics.hpp"
#include "amfisac/signals.hpp"
#include "amfisac/amf.hpp"
#include "amfisac/rmt.hpp"
#include "amfisac/dpd.hpp"
#include "amfisac/dpi.hpp"
#include "amfisac/bench.hpp"
