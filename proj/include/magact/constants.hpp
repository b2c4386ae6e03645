#pragma once

#include <complex>
#include <numbers>

namespace magact {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr double mu0 = 4.0e-7 * pi;  // vacuum permeability [H/m]
inline constexpr double two_pi = 2.0 * pi;

inline double rad_to_deg(double rad) { return rad * 180.0 / pi; }
inline double deg_to_rad(double deg) { return deg * pi / 180.0; }
inline double hz_to_rad(double hz) { return two_pi * hz; }
inline double rad_to_hz(double omega) { return omega / two_pi; }

}  // namespace magact
