#pragma once

#include "bkrlab/space.hpp"
#include "bkrlab/field.hpp"
#include "bkrlab/events.hpp"
#include "bkrlab/report.hpp"
#include "bkrlab/monte_carlo.hpp"
#include "bkrlab/inequalities.hpp"
#include "bkrlab/stochastic_order.hpp"
#include "bkrlab/applications.hpp"
#include "bkrlab/report_io.hpp"
#include "bkrlab/worker_pool.hpp"
#include "bkrlab/scenario.hpp"
#include "bkrlab/fuzz.hpp"
