#pragma once

#include "pmgame/adversaries.hpp"
#include "pmgame/batch.hpp"
#include "pmgame/board.hpp"
#include "pmgame/engine.hpp"
#include "pmgame/graph.hpp"
#include "pmgame/kn_strategies.hpp"
#include "pmgame/local_search.hpp"
#include "pmgame/matching.hpp"
#include "pmgame/orchestrator.hpp"
#include "pmgame/partition.hpp"
#include "pmgame/rng.hpp"
#include "pmgame/solver.hpp"
