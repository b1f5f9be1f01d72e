#pragma once

#include "allocation.hpp"
#include "analysis.hpp"
#include "engine.hpp"
#include "error.hpp"
#include "generators.hpp"
#include "graph.hpp"
#include "message_io.hpp"
#include "parallel.hpp"
#include "programs.hpp"
#include "rng.hpp"
#include "shuffle.hpp"
#include "sweep.hpp"
#include "verify.hpp"
#include "worker_set.hpp"
