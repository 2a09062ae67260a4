#include "magnomech/spectra.hpp"

#include "magnomech/backaction.hpp"
#include "magnomech/errors.hpp"
#include "magnomech/units.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace magnomech
{
namespace
{
constexpr Complex kI{0.0, 1.0};
}

std::vector<double> linspace(double start, double stop, std::size_t points)
{
    std::vector<double> out(points);
    if (points == 1) {
        out[0] = start;
        return out;
    }
    const double step = (stop - start) / static_cast<double>(points - 1);
    for (std::size_t k = 0; k < points; ++k) {
        out[k] = start + step * static_cast<double>(k);
    }
    if (points > 1) {
        out.back() = stop;
    }
    return out;
}

void check_grid(std::span<const double> grid)
{
    if (grid.empty()) {
        throw GridError("frequency grid is empty");
    }
    for (std::size_t k = 0; k < grid.size(); ++k) {
        if (!std::isfinite(grid[k])) {
            throw GridError("frequency grid contains a non-finite value");
        }
        if (k > 0 && !(grid[k] > grid[k - 1])) {
            throw GridError("frequency grid is not strictly increasing at index " + std::to_string(k));
        }
    }
}

Spectrum normal_mode_spectrum(const SystemParams& params, std::span<const double> grid_hz)
{
    params.validate();
    check_grid(grid_hz);

    Spectrum s;
    s.freq.assign(grid_hz.begin(), grid_hz.end());
    s.response.reserve(grid_hz.size());
    const double g2 = params.g_am * params.g_am;
    for (double f : grid_hz) {
        const double w = angular(f);
        const Complex inv_a = -kI * (w - params.omega_a) + 0.5 * params.kappa;
        const Complex chi_m_probe = 1.0 / (-kI * (w - params.omega_m) + 0.5 * params.gamma_m);
        const Complex lambda = 1.0 / (inv_a + g2 * chi_m_probe);
        s.response.push_back(1.0 - params.kappa_ext * lambda);
    }
    s.meta.kind = SpectrumKind::NormalMode;
    s.meta.frame = FrequencyFrame::Absolute;
    s.meta.params = params;
    return s;
}

Spectrum mmit_spectrum(const SystemParams& params, const DriveConfig& drive,
                       std::span<const double> offset_grid_hz)
{
    check_grid(offset_grid_hz);
    const SteadyState state = steady_state(params, drive);

    const Complex g_mb = params.g_mb0 * state.m_amp;
    const double n = state.magnon_population;
    const double phonon = params.omega_b + params.delta_kerr * n;
    const double phonon_width = params.gamma_b + params.alpha * n;
    const double g = params.g_am;
    const double root_ext = std::sqrt(params.kappa_ext);

    Spectrum s;
    s.freq.assign(offset_grid_hz.begin(), offset_grid_hz.end());
    s.response.reserve(offset_grid_hz.size());
    for (double f : offset_grid_hz) {
        const double w = angular(f);
        const Complex ca = chi_a(w, params, drive);
        const Complex xi = dressed_magnon_response(w, params, drive);
        const Complex sigma = self_energy(w, params, drive, state);

        // Phonon response to the magnon force: x = b + b^dag.
        const Complex chi_b = 1.0 / (-kI * (w - phonon) + 0.5 * phonon_width);
        const Complex chi_b_mirror = 1.0 / (-kI * (w + phonon) + 0.5 * phonon_width);
        const Complex d = chi_b - chi_b_mirror;

        // Unit probe input; eliminate a, m, a^dag, m^dag, b, b^dag.
        const Complex x = -d * std::conj(g_mb) * g * xi * ca * root_ext / (1.0 - kI * d * sigma);
        const Complex m = xi * (-kI * g * ca * root_ext - kI * g_mb * x);
        const Complex a = ca * (root_ext - kI * g * m);
        s.response.push_back(1.0 - root_ext * a);
    }
    s.meta.kind = SpectrumKind::Mmit;
    s.meta.frame = FrequencyFrame::DriveOffset;
    s.meta.params = params;
    s.meta.drive = drive;
    return s;
}

Spectrum add_noise(const Spectrum& s, double sigma, std::uint64_t seed)
{
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
        throw InvalidParameter("noise sigma must be finite and non-negative");
    }
    Spectrum out = s;
    out.meta.noise = NoiseRecord{sigma, seed};
    if (sigma == 0.0) {
        return out;
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, sigma);
    for (auto& z : out.response) {
        const double re = normal(rng);
        const double im = normal(rng);
        z += Complex{re, im};
    }
    return out;
}

double window_contrast(const Spectrum& s)
{
    if (s.size() < 2) {
        return 0.0;
    }
    const double f0 = s.freq.front();
    const double span = s.freq.back() - f0;
    const Complex z0 = s.response.front();
    const Complex dz = s.response.back() - z0;
    double best = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k) {
        const Complex chord = z0 + dz * ((s.freq[k] - f0) / span);
        best = std::max(best, std::abs(s.response[k] - chord));
    }
    return best;
}
}  // namespace magnomech
