// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <numbers>

namespace wpt {

inline constexpr double speed_of_light = 299792458.0;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watts_to_dbm(double watts) { return 10.0 * std::log10(watts) + 30.0; }
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

} // namespace wpt
