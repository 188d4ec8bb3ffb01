#pragma once

#include "mmen/adam.hpp"
#include "mmen/baselines.hpp"
#include "mmen/cascade_io.hpp"
#include "mmen/commands.hpp"
#include "mmen/epidemic.hpp"
#include "mmen/featurize.hpp"
#include "mmen/grad_check.hpp"
#include "mmen/graph.hpp"
#include "mmen/model.hpp"
#include "mmen/objective.hpp"
#include "mmen/param_store.hpp"
#include "mmen/report.hpp"
#include "mmen/synth.hpp"
#include "mmen/tape.hpp"
#include "mmen/train.hpp"
