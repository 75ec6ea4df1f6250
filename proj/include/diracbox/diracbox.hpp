#pragma once

// Convenience include for the whole library.

#include "diracbox/basis.hpp"
#include "diracbox/bessel.hpp"
#include "diracbox/errors.hpp"
#include "diracbox/evolution.hpp"
#include "diracbox/grid_oracle.hpp"
#include "diracbox/kick.hpp"
#include "diracbox/numerics.hpp"
#include "diracbox/observables.hpp"
#include "diracbox/scenario.hpp"
#include "diracbox/state.hpp"
#include "diracbox/version.hpp"
#include "diracbox/wavepacket.hpp"
