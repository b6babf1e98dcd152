#pragma once

#include "logifit/errors.hpp"
#include "logifit/version.hpp"
#include "logifit/expr.hpp"
#include "logifit/space.hpp"
#include "logifit/trajectory.hpp"
#include "logifit/model.hpp"
#include "logifit/formula.hpp"
#include "logifit/parser.hpp"
#include "logifit/rng.hpp"
#include "logifit/sim.hpp"
#include "logifit/signal.hpp"
#include "logifit/monitor.hpp"
#include "logifit/smc.hpp"
#include "logifit/gp.hpp"
#include "logifit/lhs.hpp"
#include "logifit/search.hpp"
#include "logifit/io.hpp"
