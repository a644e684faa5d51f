#pragma once

#include "params.hpp"
#include "steady_state.hpp"
#include "linear_noise.hpp"
#include "fano.hpp"
#include "rng.hpp"
#include "jump_sim.hpp"
#include "estimators.hpp"
#include "io.hpp"
