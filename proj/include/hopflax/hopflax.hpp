#pragma once

#include "hopflax/constants.hpp"
#include "hopflax/convexity.hpp"
#include "hopflax/cost_functions.hpp"
#include "hopflax/error.hpp"
#include "hopflax/hopf_lax.hpp"
#include "hopflax/inequalities.hpp"
#include "hopflax/measures.hpp"
#include "hopflax/metric_space.hpp"
#include "hopflax/numeric.hpp"
#include "hopflax/sampling.hpp"
#include "hopflax/transport.hpp"
