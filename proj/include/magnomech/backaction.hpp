#pragma once

#include "magnomech/core_model.hpp"
#include "magnomech/units.hpp"

#include <cstddef>
#include <utility>

namespace magnomech
{
// Dynamical backaction on the phonon at the bare phonon frequency. All rates
// in rad/s.
struct BackactionResult
{
    Complex sigma;                     // self-energy at omega_b
    double gamma_mag_exact = 0.0;      // 2 Im sigma
    double gamma_plus = 0.0;           // scattering into the upper normal mode
    double gamma_minus = 0.0;          // scattering into the lower normal mode
    double gamma_mag_approx = 0.0;     // gamma_plus - gamma_minus
    double gamma_mag_corrected = 0.0;  // gamma_mag_exact + alpha |<m>|^2
    double spring_shift = 0.0;         // -Re sigma + delta_kerr |<m>|^2; positive stiffens
    double gamma_tot = 0.0;            // gamma_b + gamma_mag_corrected
    double magnon_population = 0.0;
    bool weak_coupling = true;         // |g+-| < kappa+-/10
    bool unstable = false;             // gamma_tot < 0
};

struct ScatteringRates
{
    double gamma_plus = 0.0;
    double gamma_minus = 0.0;
    bool weak_coupling = true;
};

// chi_x[w] = 1 / (-i (Delta_x + w) + decay_x / 2), Delta_x = omega_d - omega_x.
Complex chi_m(double omega, const SystemParams& params, const DriveConfig& drive);
Complex chi_a(double omega, const SystemParams& params, const DriveConfig& drive);

// Magnon response dressed by the cavity: Xi^-1 = chi_m^-1 + g_am^2 chi_a.
Complex dressed_magnon_response(double omega, const SystemParams& params, const DriveConfig& drive);

// Sigma[w] = i |g0 <m>|^2 (Xi[w] - Xi*[-w]).
Complex self_energy(double omega, const SystemParams& params, const DriveConfig& drive);
Complex self_energy(double omega, const SystemParams& params, const DriveConfig& drive,
                    const SteadyState& state);

ScatteringRates scattering_rates(const SystemParams& params, const DriveConfig& drive);

BackactionResult gamma_mag(const SystemParams& params, const DriveConfig& drive);

struct EvasionRoot
{
    double omega_d = 0.0;       // rad/s
    double residual = 0.0;      // gamma_mag_corrected at omega_d
    std::size_t root_count = 0; // sign changes found on the scan
};

struct EvasionOptions
{
    std::size_t scan_points = 2001;
    double tolerance_fraction = 1e-6;  // |gamma| < fraction * gamma_b
};

// Drive frequency in (omega_-, omega_+) where gamma_mag_corrected vanishes.
// Among several roots the one nearest the bracket midpoint is returned.
// Throws NoRoot when the scan finds no sign change.
EvasionRoot find_evasion_detuning(const SystemParams& params, double power,
                                  const EvasionOptions& options = {});

struct CutoffResult
{
    double splitting = 0.0;  // rad/s
    bool bounded = true;     // false when evasion still succeeds at the search limit
};

struct CutoffOptions
{
    double tolerance = kTwoPi * 1.0e3;  // rad/s
    double step = 0.0;                  // 0 selects omega_b / 8
    double max_splitting = 0.0;         // 0 selects 2 g_am + 4 omega_b
    EvasionOptions evasion = {};
};

// Largest normal-mode splitting below which every splitting admits an
// evasion root. The magnon-photon detuning keeps the sign of params
// (positive when zero). Returns 2 g_am when evasion already fails there.
CutoffResult evasion_cutoff_splitting(const SystemParams& params, double power,
                                      const CutoffOptions& options = {});
}  // namespace magnomech
