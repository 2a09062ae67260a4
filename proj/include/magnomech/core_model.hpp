#pragma once

#include <complex>

namespace magnomech
{
using Complex = std::complex<double>;

// Static rates and frequencies of the cavity / magnon / phonon system.
// Every field is an angular quantity (rad/s); alpha and delta_kerr are per
// unit magnon population.
struct SystemParams
{
    double omega_a = 0.0;     // cavity
    double omega_m = 0.0;     // Kittel magnon
    double kappa = 0.0;       // total cavity energy decay
    double kappa_ext = 0.0;   // port (external) cavity decay
    double gamma_m = 0.0;     // magnon decay
    double omega_b = 0.0;     // phonon
    double gamma_b = 0.0;     // intrinsic phonon linewidth
    double g_am = 0.0;        // magnon-photon coupling
    double g_mb0 = 0.0;       // single-magnon magnomechanical coupling
    double alpha = 0.0;       // phenomenological damping correction
    double delta_kerr = 0.0;  // static phonon frequency offset

    double detuning_am() const { return omega_a - omega_m; }

    // Phonon frequency above five times the largest electromagnetic linewidth.
    bool is_resolved() const;

    // Throws InvalidParameter when an invariant is violated.
    void validate() const;
};

struct DriveConfig
{
    double omega_d = 0.0;  // rad/s
    double power = 0.0;    // W at the port

    void validate() const;
};

struct HybridModes
{
    double omega_plus = 0.0;
    double omega_minus = 0.0;
    double kappa_plus = 0.0;
    double kappa_minus = 0.0;
    double theta = 0.0;      // mixing angle folded into [-pi/4, pi/4]
    double rotation = 0.0;   // unfolded angle: upper mode = cos(r) a - sin(r) m
    double splitting = 0.0;  // omega_plus - omega_minus

    // Magnon weight of each normal mode; sums to one.
    double magnon_fraction_plus() const;
    double magnon_fraction_minus() const;
};

struct SteadyState
{
    Complex a_amp;
    Complex m_amp;
    Complex A_plus_amp;
    Complex A_minus_amp;
    Complex g_plus;   // rad/s
    Complex g_minus;  // rad/s
    double magnon_population = 0.0;
};

HybridModes hybridize(const SystemParams& params);

// Intracavity drive rate sqrt(kappa_ext * P / (hbar * omega_d)), rad/s.
double drive_amplitude(const DriveConfig& drive, const SystemParams& params);

SteadyState steady_state(const SystemParams& params, const DriveConfig& drive);

// Magnon-photon detuning that produces the requested normal-mode splitting
// (both angular). Negative `sign` places the magnon above the cavity.
double detuning_for_splitting(double g_am, double splitting, int sign = +1);
}  // namespace magnomech
