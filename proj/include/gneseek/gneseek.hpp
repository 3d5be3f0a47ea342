#pragma once

// Umbrella header: the whole library in one include.

#include "gneseek/common.hpp"
#include "gneseek/rng.hpp"
#include "gneseek/graph.hpp"
#include "gneseek/strategy_set.hpp"
#include "gneseek/bregman.hpp"
#include "gneseek/estimator.hpp"
#include "gneseek/game.hpp"
#include "gneseek/cournot.hpp"
#include "gneseek/schedules.hpp"
#include "gneseek/learner.hpp"
#include "gneseek/equilibrium.hpp"
#include "gneseek/metrics.hpp"
#include "gneseek/config.hpp"
#include "gneseek/experiment.hpp"
