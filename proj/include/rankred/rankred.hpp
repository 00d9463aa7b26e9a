#pragma once

#include "rankred/tolerance.hpp"
#include "rankred/matrix_core.hpp"
#include "rankred/pencil.hpp"
#include "rankred/wedderburn.hpp"
#include "rankred/game.hpp"
#include "rankred/reduction.hpp"
#include "rankred/equilibrium.hpp"
#include "rankred/genericlab.hpp"
