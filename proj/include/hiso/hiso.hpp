#pragma once

#include "hiso/config.hpp"
#include "hiso/cost.hpp"
#include "hiso/dhiso.hpp"
#include "hiso/experiments.hpp"
#include "hiso/flows.hpp"
#include "hiso/graph.hpp"
#include "hiso/logreg.hpp"
#include "hiso/random.hpp"
#include "hiso/suites.hpp"
#include "hiso/trace_io.hpp"
