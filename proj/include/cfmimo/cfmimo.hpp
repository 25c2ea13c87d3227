#pragma once

// Uplink simulator for user-centric cell-free massive MIMO with fairness
// scheduling. Include this header for the whole library.

#include "association.hpp"
#include "channel.hpp"
#include "config.hpp"
#include "engine.hpp"
#include "output.hpp"
#include "parallel.hpp"
#include "rate_control.hpp"
#include "receiver.hpp"
#include "rng.hpp"
#include "scheduler.hpp"
#include "topology.hpp"
