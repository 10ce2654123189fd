#pragma once

#include "plots/baselines.hpp"
#include "plots/bps.hpp"
#include "plots/core.hpp"
#include "plots/cpr.hpp"
#include "plots/gridcraft.hpp"
#include "plots/harness.hpp"
#include "plots/nosketch_agent.hpp"
#include "plots/piano.hpp"
#include "plots/scripted_env.hpp"
#include "plots/sketch_agent.hpp"
#include "plots/tasks.hpp"
