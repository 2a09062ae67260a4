#pragma once

#include "magnomech/core_model.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace magnomech
{
enum class SpectrumKind
{
    NormalMode,
    Mmit,
    Synthetic,  // anything not produced by the forward model (e.g. test windows)
};

enum class FrequencyFrame
{
    Absolute,     // probe frequency
    DriveOffset,  // probe minus drive frequency
};

struct NoiseRecord
{
    double sigma = 0.0;
    std::uint64_t seed = 0;
};

struct SpectrumMeta
{
    SpectrumKind kind = SpectrumKind::Synthetic;
    FrequencyFrame frame = FrequencyFrame::Absolute;
    std::optional<SystemParams> params;
    std::optional<DriveConfig> drive;
    std::optional<NoiseRecord> noise;
};

// One-port reflection S-parameter sampled on a strictly increasing grid of
// linear frequencies (Hz).
struct Spectrum
{
    std::vector<double> freq;
    std::vector<Complex> response;
    SpectrumMeta meta;

    std::size_t size() const { return freq.size(); }
};

// `points` samples from start to stop inclusive.
std::vector<double> linspace(double start, double stop, std::size_t points);

// Throws GridError unless strictly increasing and finite.
void check_grid(std::span<const double> grid);

// Probe-only reflection S = 1 - kappa_ext Lambda with
// Lambda^-1 = chi_a,probe^-1 + g_am^2 chi_m,probe on absolute probe frequencies.
Spectrum normal_mode_spectrum(const SystemParams& params, std::span<const double> grid_hz);

// Driven two-tone reflection versus probe offset from the drive (Hz). Both
// mechanical sidebands (and their conjugate couplings) are kept, so the
// window pole near +omega_b has width gamma_tot and sits at
// omega_b + spring_shift.
Spectrum mmit_spectrum(const SystemParams& params, const DriveConfig& drive,
                       std::span<const double> offset_grid_hz);

// Adds IID N(0, sigma^2) to real and imaginary parts; mt19937_64 seeded with `seed`.
Spectrum add_noise(const Spectrum& s, double sigma, std::uint64_t seed);

// Largest distance of the response from the chord between its end points.
double window_contrast(const Spectrum& s);
}  // namespace magnomech
