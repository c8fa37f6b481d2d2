#pragma once

#include "srcest/baselines.hpp"
#include "srcest/bench.hpp"
#include "srcest/errors.hpp"
#include "srcest/general_estimator.hpp"
#include "srcest/generators.hpp"
#include "srcest/graph.hpp"
#include "srcest/methods.hpp"
#include "srcest/miqcqp.hpp"
#include "srcest/oracle_suite.hpp"
#include "srcest/path_oracle.hpp"
#include "srcest/random.hpp"
#include "srcest/si_model.hpp"
#include "srcest/tree_estimator.hpp"
#include "srcest/trees.hpp"
