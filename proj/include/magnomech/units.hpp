#pragma once

#include <numbers>

namespace magnomech
{
inline constexpr double kHbar = 1.054571817e-34;  // J s
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Interfaces speak linear frequency f = omega / 2pi; the models work in rad/s.
constexpr double angular(double hz) { return kTwoPi * hz; }
constexpr double linear(double rad_per_s) { return rad_per_s / kTwoPi; }
}  // namespace magnomech
