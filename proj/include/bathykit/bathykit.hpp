// Umbrella header for the bathymetry survey toolkit.
#pragma once

#include "bathykit/asvsim.hpp"
#include "bathykit/calibrate.hpp"
#include "bathykit/geodesy.hpp"
#include "bathykit/grid.hpp"
#include "bathykit/hypsometry.hpp"
#include "bathykit/mission.hpp"
#include "bathykit/sonarlog.hpp"
#include "bathykit/tin.hpp"

namespace bathykit {
inline constexpr const char* kVersion = "1.0.0";
}
