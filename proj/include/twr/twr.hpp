#pragma once

// Umbrella header for the two-way relay beamforming library.

#include "twr/channel.hpp"
#include "twr/experiment.hpp"
#include "twr/fd_relay.hpp"
#include "twr/had_relay.hpp"
#include "twr/linalg.hpp"
#include "twr/link_eval.hpp"
#include "twr/rng.hpp"
#include "twr/tensor.hpp"
#include "twr/terminal.hpp"
#include "twr/waterfill.hpp"
