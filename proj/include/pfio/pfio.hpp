#pragma once

#include "pfio/angular.hpp"
#include "pfio/config.hpp"
#include "pfio/csv.hpp"
#include "pfio/error.hpp"
#include "pfio/estimate.hpp"
#include "pfio/fio.hpp"
#include "pfio/fit.hpp"
#include "pfio/grid.hpp"
#include "pfio/littlewood_paley.hpp"
#include "pfio/mollifier.hpp"
#include "pfio/phase.hpp"
#include "pfio/runner.hpp"
#include "pfio/symbol.hpp"
#include "pfio/types.hpp"
