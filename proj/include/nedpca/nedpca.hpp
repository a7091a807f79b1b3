#pragma once

#include "nedpca/closed_forms.hpp"
#include "nedpca/configuration.hpp"
#include "nedpca/core.hpp"
#include "nedpca/errors.hpp"
#include "nedpca/exact_solver.hpp"
#include "nedpca/io.hpp"
#include "nedpca/m2_analytics.hpp"
#include "nedpca/montecarlo.hpp"
#include "nedpca/params.hpp"
#include "nedpca/rational.hpp"
#include "nedpca/rng.hpp"
#include "nedpca/stationary_table.hpp"
