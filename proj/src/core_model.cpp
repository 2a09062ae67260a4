#include "magnomech/core_model.hpp"

#include "magnomech/errors.hpp"
#include "magnomech/units.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace magnomech
{
namespace
{
void require(bool ok, const std::string& what)
{
    if (!ok) {
        throw InvalidParameter(what);
    }
}

bool finite_all(std::initializer_list<double> xs)
{
    return std::all_of(xs.begin(), xs.end(), [](double x) { return std::isfinite(x); });
}
}  // namespace

bool SystemParams::is_resolved() const
{
    return omega_b > 5.0 * std::max(kappa, gamma_m);
}

void SystemParams::validate() const
{
    require(finite_all({omega_a, omega_m, kappa, kappa_ext, gamma_m, omega_b, gamma_b, g_am, g_mb0,
                        alpha, delta_kerr}),
            "system parameters must be finite");
    require(omega_a > 0.0, "cavity frequency must be positive");
    require(omega_m > 0.0, "magnon frequency must be positive");
    require(omega_b > 0.0, "phonon frequency must be positive");
    require(kappa >= 0.0 && gamma_m >= 0.0 && gamma_b >= 0.0, "decay rates must be non-negative");
    require(kappa_ext >= 0.0 && kappa_ext <= kappa, "kappa_ext must lie in [0, kappa]");
}

void DriveConfig::validate() const
{
    require(std::isfinite(omega_d) && omega_d > 0.0, "drive frequency must be positive");
    require(std::isfinite(power) && power >= 0.0, "drive power must be non-negative");
}

double HybridModes::magnon_fraction_plus() const
{
    const double s = std::sin(rotation);
    return s * s;
}

double HybridModes::magnon_fraction_minus() const
{
    const double c = std::cos(rotation);
    return c * c;
}

HybridModes hybridize(const SystemParams& params)
{
    const double delta = params.detuning_am();
    const double root = std::hypot(delta, 2.0 * params.g_am);
    const double mean = 0.5 * (params.omega_a + params.omega_m);

    HybridModes modes;
    modes.omega_plus = mean + 0.5 * root;
    modes.omega_minus = mean - 0.5 * root;
    modes.splitting = root;

    // Eigenvectors of [[w_a, g], [g, w_m]]: upper (cos r, -sin r), lower
    // (sin r, cos r) in the (a, m) basis. r stays continuous across
    // delta = 0, so the magnon-like mode is always labelled correctly.
    modes.rotation = 0.5 * std::atan2(-2.0 * params.g_am, delta);

    double theta = modes.rotation;
    constexpr double quarter = std::numbers::pi / 4.0;
    if (theta > quarter) {
        theta -= 2.0 * quarter;
    } else if (theta < -quarter) {
        theta += 2.0 * quarter;
    }
    modes.theta = theta;

    const double wm_plus = modes.magnon_fraction_plus();
    const double wm_minus = modes.magnon_fraction_minus();
    modes.kappa_plus = params.kappa * wm_minus + params.gamma_m * wm_plus;
    modes.kappa_minus = params.kappa * wm_plus + params.gamma_m * wm_minus;
    return modes;
}

double drive_amplitude(const DriveConfig& drive, const SystemParams& params)
{
    if (drive.power == 0.0) {
        return 0.0;
    }
    return std::sqrt(params.kappa_ext * drive.power / (kHbar * drive.omega_d));
}

SteadyState steady_state(const SystemParams& params, const DriveConfig& drive)
{
    params.validate();
    drive.validate();

    const Complex i{0.0, 1.0};
    const double delta_a = drive.omega_d - params.omega_a;
    const double delta_m = drive.omega_d - params.omega_m;

    // [m11  i g] [a]   [eps]
    // [i g  m22] [m] = [ 0 ]
    const Complex m11 = -i * delta_a + 0.5 * params.kappa;
    const Complex m22 = -i * delta_m + 0.5 * params.gamma_m;
    const Complex coupling = i * params.g_am;
    const Complex det = m11 * m22 - coupling * coupling;
    const double scale = std::abs(m11) * std::abs(m22) + params.g_am * params.g_am;
    if (!(std::abs(det) > 16.0 * std::numeric_limits<double>::epsilon() * scale)) {
        throw SingularSystem("steady-state system is singular (lossless drive on a normal mode)");
    }

    const double eps = drive_amplitude(drive, params);
    SteadyState ss;
    ss.a_amp = eps * m22 / det;
    ss.m_amp = -coupling * eps / det;
    ss.magnon_population = std::norm(ss.m_amp);

    const HybridModes modes = hybridize(params);
    const double c = std::cos(modes.rotation);
    const double s = std::sin(modes.rotation);
    ss.A_plus_amp = c * ss.a_amp - s * ss.m_amp;
    ss.A_minus_amp = s * ss.a_amp + c * ss.m_amp;

    // m = -sin(r) A+ + cos(r) A-, so linearising g0 m^dag m (b + b^dag)
    // gives g+ = g0 [A+ sin^2 r - A- sin(2r)/2], g- = g0 [A- cos^2 r - A+ sin(2r)/2].
    ss.g_plus = params.g_mb0 * (ss.A_plus_amp * s * s - ss.A_minus_amp * s * c);
    ss.g_minus = params.g_mb0 * (ss.A_minus_amp * c * c - ss.A_plus_amp * s * c);
    return ss;
}

double detuning_for_splitting(double g_am, double splitting, int sign)
{
    const double radicand = splitting * splitting - 4.0 * g_am * g_am;
    if (radicand < -1e-12 * splitting * splitting) {
        throw InvalidParameter("splitting below the 2 g_am minimum");
    }
    const double delta = std::sqrt(std::max(radicand, 0.0));
    return sign < 0 ? -delta : delta;
}
}  // namespace magnomech
