#pragma once

#include "homeig/continuation.hpp"
#include "homeig/dense.hpp"
#include "homeig/errors.hpp"
#include "homeig/evaluation.hpp"
#include "homeig/matrix_market.hpp"
#include "homeig/operator_core.hpp"
#include "homeig/oracle.hpp"
#include "homeig/report.hpp"
#include "homeig/series.hpp"
#include "homeig/validation.hpp"
