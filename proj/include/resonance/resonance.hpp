#pragma once

#include "anderson.hpp"
#include "canonical.hpp"
#include "cli.hpp"
#include "conditions.hpp"
#include "config.hpp"
#include "dispatch.hpp"
#include "engine.hpp"
#include "errors.hpp"
#include "nonlinearity.hpp"
#include "problem.hpp"
#include "quadrature.hpp"
#include "report.hpp"
#include "solvability.hpp"
#include "spectral.hpp"
#include "systems.hpp"
