#pragma once

#include "jumpcal/chaos.hpp"
#include "jumpcal/cho.hpp"
#include "jumpcal/configuration.hpp"
#include "jumpcal/functional.hpp"
#include "jumpcal/harness.hpp"
#include "jumpcal/measure.hpp"
#include "jumpcal/operators.hpp"
#include "jumpcal/quadrature.hpp"
#include "jumpcal/region.hpp"
#include "jumpcal/rng.hpp"
#include "jumpcal/sampler.hpp"
#include "jumpcal/volterra.hpp"
