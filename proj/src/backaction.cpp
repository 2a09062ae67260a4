#include "magnomech/backaction.hpp"

#include "magnomech/errors.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

namespace magnomech
{
namespace
{
constexpr Complex kI{0.0, 1.0};

Complex inverse_susceptibility(double detuning, double omega, double decay)
{
    return -kI * (detuning + omega) + 0.5 * decay;
}

// Lorentzian sideband rate of one normal mode.
double sideband_rate(Complex g, double kappa_mode, double offset)
{
    const double denom = 4.0 * offset * offset + kappa_mode * kappa_mode;
    if (denom == 0.0) {
        return 0.0;
    }
    return 4.0 * std::norm(g) * kappa_mode / denom;
}

double corrected_gamma(const SystemParams& params, double omega_d, double power)
{
    return gamma_mag(params, DriveConfig{omega_d, power}).gamma_mag_corrected;
}
}  // namespace

Complex chi_m(double omega, const SystemParams& params, const DriveConfig& drive)
{
    return 1.0 / inverse_susceptibility(drive.omega_d - params.omega_m, omega, params.gamma_m);
}

Complex chi_a(double omega, const SystemParams& params, const DriveConfig& drive)
{
    return 1.0 / inverse_susceptibility(drive.omega_d - params.omega_a, omega, params.kappa);
}

Complex dressed_magnon_response(double omega, const SystemParams& params, const DriveConfig& drive)
{
    const Complex inv_m = inverse_susceptibility(drive.omega_d - params.omega_m, omega, params.gamma_m);
    return 1.0 / (inv_m + params.g_am * params.g_am * chi_a(omega, params, drive));
}

Complex self_energy(double omega, const SystemParams& params, const DriveConfig& drive,
                    const SteadyState& state)
{
    const double coupling_sq = params.g_mb0 * params.g_mb0 * state.magnon_population;
    if (coupling_sq == 0.0) {
        return {};
    }
    const Complex xi = dressed_magnon_response(omega, params, drive);
    const Complex xi_mirror = std::conj(dressed_magnon_response(-omega, params, drive));
    return kI * coupling_sq * (xi - xi_mirror);
}

Complex self_energy(double omega, const SystemParams& params, const DriveConfig& drive)
{
    return self_energy(omega, params, drive, steady_state(params, drive));
}

ScatteringRates scattering_rates(const SystemParams& params, const DriveConfig& drive)
{
    const SteadyState state = steady_state(params, drive);
    const HybridModes modes = hybridize(params);

    const double delta_plus = drive.omega_d - modes.omega_plus;
    const double delta_minus = drive.omega_d - modes.omega_minus;

    ScatteringRates rates;
    rates.gamma_plus = sideband_rate(state.g_plus, modes.kappa_plus, delta_plus + params.omega_b);
    rates.gamma_minus = sideband_rate(state.g_minus, modes.kappa_minus, delta_minus - params.omega_b);
    rates.weak_coupling = std::abs(state.g_plus) < modes.kappa_plus / 10.0
                          && std::abs(state.g_minus) < modes.kappa_minus / 10.0;
    return rates;
}

BackactionResult gamma_mag(const SystemParams& params, const DriveConfig& drive)
{
    const SteadyState state = steady_state(params, drive);
    const ScatteringRates rates = scattering_rates(params, drive);

    BackactionResult out;
    out.magnon_population = state.magnon_population;
    out.sigma = self_energy(params.omega_b, params, drive, state);
    out.gamma_mag_exact = 2.0 * out.sigma.imag();
    out.gamma_plus = rates.gamma_plus;
    out.gamma_minus = rates.gamma_minus;
    out.gamma_mag_approx = rates.gamma_plus - rates.gamma_minus;
    out.gamma_mag_corrected = out.gamma_mag_exact + params.alpha * state.magnon_population;
    out.spring_shift = -out.sigma.real() + params.delta_kerr * state.magnon_population;
    out.gamma_tot = params.gamma_b + out.gamma_mag_corrected;
    out.weak_coupling = rates.weak_coupling;
    out.unstable = out.gamma_tot < 0.0;
    return out;
}

EvasionRoot find_evasion_detuning(const SystemParams& params, double power,
                                  const EvasionOptions& options)
{
    params.validate();
    if (options.scan_points < 3) {
        throw InvalidParameter("evasion scan needs at least three points");
    }
    const HybridModes modes = hybridize(params);
    const double lo = modes.omega_minus;
    const double hi = modes.omega_plus;
    const double mid = 0.5 * (lo + hi);
    const double tol = options.tolerance_fraction * params.gamma_b;

    const std::size_t n = options.scan_points;
    std::vector<double> xs(n);
    std::vector<double> fs(n);
    for (std::size_t k = 0; k < n; ++k) {
        xs[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
        fs[k] = corrected_gamma(params, xs[k], power);
    }

    // Candidates are brackets with a strict sign change. A run of scan points
    // within tolerance is bracketed by its outside neighbours when they differ
    // in sign, otherwise it collapses to its smallest point.
    struct Candidate
    {
        double a;
        double b;
        bool exact;
    };
    std::vector<Candidate> candidates;
    std::size_t k = 0;
    while (k < n) {
        if (std::abs(fs[k]) <= tol) {
            std::size_t end = k;
            std::size_t best = k;
            while (end + 1 < n && std::abs(fs[end + 1]) <= tol) {
                ++end;
                if (std::abs(fs[end]) < std::abs(fs[best])) {
                    best = end;
                }
            }
            if (k > 0 && end + 1 < n && std::signbit(fs[k - 1]) != std::signbit(fs[end + 1])) {
                candidates.push_back({xs[k - 1], xs[end + 1], false});
            } else {
                candidates.push_back({xs[best], xs[best], true});
            }
            k = end + 1;
            continue;
        }
        if (k + 1 < n && std::abs(fs[k + 1]) > tol && std::signbit(fs[k]) != std::signbit(fs[k + 1])) {
            candidates.push_back({xs[k], xs[k + 1], false});
        }
        ++k;
    }
    if (candidates.empty()) {
        throw NoRoot("no sign change of the magnomechanical damping between the normal modes");
    }

    const auto nearest = std::min_element(candidates.begin(), candidates.end(),
                                          [mid](const Candidate& l, const Candidate& r) {
                                              return std::abs(0.5 * (l.a + l.b) - mid)
                                                     < std::abs(0.5 * (r.a + r.b) - mid);
                                          });

    EvasionRoot root;
    root.root_count = candidates.size();
    if (nearest->exact) {
        root.omega_d = nearest->a;
    } else {
        auto f = [&](double x) { return corrected_gamma(params, x, power); };
        std::uintmax_t max_iter = 200;
        boost::math::tools::eps_tolerance<double> stop(std::numeric_limits<double>::digits - 2);
        const auto fa = f(nearest->a);
        const auto fb = f(nearest->b);
        const auto bracket = boost::math::tools::toms748_solve(f, nearest->a, nearest->b, fa, fb, stop, max_iter);
        const double x0 = bracket.first;
        const double x1 = bracket.second;
        root.omega_d = std::abs(f(x0)) <= std::abs(f(x1)) ? x0 : x1;
    }
    root.residual = corrected_gamma(params, root.omega_d, power);
    return root;
}

CutoffResult evasion_cutoff_splitting(const SystemParams& params, double power,
                                      const CutoffOptions& options)
{
    params.validate();
    const int side = params.detuning_am() < 0.0 ? -1 : +1;
    const double min_split = 2.0 * params.g_am;
    const double step = options.step > 0.0 ? options.step : params.omega_b / 16.0;
    const double max_split = options.max_splitting > 0.0 ? options.max_splitting
                                                          : min_split + 4.0 * params.omega_b;

    auto succeeds = [&](double splitting) {
        SystemParams trial = params;
        trial.omega_m = params.omega_a - detuning_for_splitting(params.g_am, splitting, side);
        try {
            find_evasion_detuning(trial, power, options.evasion);
            return true;
        } catch (const NoRoot&) {
            return false;
        }
    };

    if (!succeeds(min_split)) {
        return {min_split, true};
    }

    double good = min_split;
    std::optional<double> bad;
    for (double s = min_split + step; s <= max_split + 0.5 * step; s += step) {
        const double trial = std::min(s, max_split);
        if (succeeds(trial)) {
            good = trial;
        } else {
            bad = trial;
            break;
        }
    }
    if (!bad) {
        return {good, false};
    }

    double fail = *bad;
    while (fail - good > options.tolerance) {
        const double mid = 0.5 * (good + fail);
        if (succeeds(mid)) {
            good = mid;
        } else {
            fail = mid;
        }
    }
    return {good, true};
}
}  // namespace magnomech
