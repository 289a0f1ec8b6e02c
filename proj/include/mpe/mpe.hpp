#pragma once

#include "mpe/certify.hpp"
#include "mpe/error.hpp"
#include "mpe/game.hpp"
#include "mpe/io.hpp"
#include "mpe/nash_map.hpp"
#include "mpe/oracles.hpp"
#include "mpe/profile.hpp"
#include "mpe/simplicial.hpp"
#include "mpe/solve.hpp"
