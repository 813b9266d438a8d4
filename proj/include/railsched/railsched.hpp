#pragma once

#include "railsched/allocation.hpp"
#include "railsched/bench.hpp"
#include "railsched/core.hpp"
#include "railsched/decode.hpp"
#include "railsched/exact.hpp"
#include "railsched/gantt.hpp"
#include "railsched/heuristic.hpp"
#include "railsched/instance_gen.hpp"
#include "railsched/io.hpp"
#include "railsched/timing.hpp"
#include "railsched/validate.hpp"
