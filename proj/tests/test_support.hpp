#pragma once

#include "magnomech/backaction.hpp"
#include "magnomech/core_model.hpp"
#include "magnomech/units.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

// Absolute tolerance check that reports the difference on failure.
#define CHECK_NEAR(a, b, tol) CHECK_LE(std::abs((a) - (b)), (tol))
#define CHECK_DOUBLE_EQ(a, b) CHECK_EQ((a), doctest::Approx(b).epsilon(4.0 * std::numeric_limits<double>::epsilon()))

namespace magnomech::testing
{
// Reference system: 21.0 MHz splitting with the magnon below the cavity.
inline SystemParams reference_params()
{
    SystemParams p;
    p.omega_a = angular(7.1e9);
    p.kappa = angular(2.0e6);
    p.kappa_ext = angular(1.0e6);
    p.gamma_m = angular(1.5e6);
    p.omega_b = angular(12.45e6);
    p.gamma_b = angular(3745.0);
    p.g_am = angular(9.34e6);
    p.g_mb0 = angular(4.56e-3);
    p.alpha = angular(-1.24e-12);
    p.omega_m = p.omega_a - detuning_for_splitting(p.g_am, angular(21.0e6), +1);
    return p;
}

// Degenerate modes with equal losses; splitting 2 g_am.
inline SystemParams symmetric_params(double splitting_hz = 2.0 * 12.45e6)
{
    SystemParams p = reference_params();
    p.omega_m = p.omega_a;
    p.gamma_m = p.kappa;
    p.g_am = angular(0.5 * splitting_hz);
    p.alpha = 0.0;
    return p;
}

inline double rel(double got, double want)
{
    return std::abs(got - want) / std::abs(want);
}

struct WeakCouplingDraw
{
    SystemParams params;
    DriveConfig drive;
};

// Random resolved-sideband system (omega_b > 10 max(kappa, gamma_m)) driven
// within half a normal-mode linewidth of the red sideband of the upper mode
// or the blue sideband of the lower mode, with |g+-| < kappa+-/100.
inline WeakCouplingDraw draw_weak_coupling(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (;;) {
        SystemParams p = reference_params();
        p.alpha = 0.0;
        p.kappa = angular(0.1e6 + 1.1e6 * u(rng));
        p.kappa_ext = p.kappa * u(rng);
        p.gamma_m = angular(0.1e6 + 1.1e6 * u(rng));
        p.g_am = angular(4.0e6 + 10.0e6 * u(rng));
        p.omega_m = p.omega_a - angular(30.0e6 * (u(rng) - 0.5));
        const HybridModes m = hybridize(p);
        const bool upper = u(rng) < 0.5;
        const double offset = u(rng) - 0.5;
        const DriveConfig d{upper ? m.omega_plus - p.omega_b + offset * m.kappa_plus
                                  : m.omega_minus + p.omega_b + offset * m.kappa_minus,
                            1e-3 + 0.02 * u(rng)};
        if (!(p.omega_b > 10.0 * std::max(p.kappa, p.gamma_m))) {
            continue;
        }
        const SteadyState s = steady_state(p, d);
        if (std::abs(s.g_plus) < m.kappa_plus / 100.0 && std::abs(s.g_minus) < m.kappa_minus / 100.0) {
            return {p, d};
        }
    }
}
}  // namespace magnomech::testing
