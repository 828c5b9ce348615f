#pragma once

#include "evoscheme/core.hpp"
#include "evoscheme/engine.hpp"
#include "evoscheme/harness.hpp"
#include "evoscheme/hybrid.hpp"
#include "evoscheme/landscape.hpp"
#include "evoscheme/operators.hpp"
#include "evoscheme/rng.hpp"
