#pragma once

#include "maxent/errors.hpp"
#include "maxent/problem.hpp"
#include "maxent/parallel.hpp"
#include "maxent/integration.hpp"
#include "maxent/gibbs.hpp"
#include "maxent/fast_gradient.hpp"
#include "maxent/linear_program.hpp"
#include "maxent/slater.hpp"
#include "maxent/discrete.hpp"
#include "maxent/closure.hpp"
#include "maxent/cmdp.hpp"
#include "maxent/config.hpp"
#include "maxent/app.hpp"
