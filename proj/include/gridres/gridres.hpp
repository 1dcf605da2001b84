// Copyright gridres contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "gridres/duration_model.hpp"
#include "gridres/error.hpp"
#include "gridres/estimators.hpp"
#include "gridres/ingest.hpp"
#include "gridres/process_core.hpp"
#include "gridres/random.hpp"
#include "gridres/rate_function.hpp"
#include "gridres/resilience.hpp"
#include "gridres/simulator.hpp"
#include "gridres/stats.hpp"
#include "gridres/weibull_mixture.hpp"
