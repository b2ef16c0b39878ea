#pragma once

#include "dlmd/channel.hpp"
#include "dlmd/engine.hpp"
#include "dlmd/harness.hpp"
#include "dlmd/problem.hpp"
#include "dlmd/quantizer.hpp"
#include "dlmd/random.hpp"
#include "dlmd/run_record.hpp"
#include "dlmd/schedules.hpp"
#include "dlmd/topology.hpp"
