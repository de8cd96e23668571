#pragma once

// Umbrella header for the whole toolkit.

#include "nkcurv/chart.hpp"
#include "nkcurv/chart_geometry.hpp"
#include "nkcurv/constructors.hpp"
#include "nkcurv/dual.hpp"
#include "nkcurv/error.hpp"
#include "nkcurv/four_tensor.hpp"
#include "nkcurv/hermitian.hpp"
#include "nkcurv/invariants.hpp"
#include "nkcurv/lemma.hpp"
#include "nkcurv/random.hpp"
#include "nkcurv/ricci.hpp"
#include "nkcurv/scenario.hpp"
