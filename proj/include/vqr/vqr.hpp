#pragma once

#include "agent.hpp"
#include "circuit.hpp"
#include "error.hpp"
#include "harness.hpp"
#include "hrap.hpp"
#include "metrics.hpp"
#include "network.hpp"
#include "random.hpp"
