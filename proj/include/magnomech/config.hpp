#pragma once

#include "magnomech/core_model.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace magnomech
{
struct WindowSpec
{
    double half_span_linewidths = 8.0;  // half width of each zoomed window in units of gamma_tot
    std::size_t points = 4001;
    int background_order = 3;
};

struct NoiseSpec
{
    double sigma = 0.0;
    bool relative = false;  // sigma scales with each window's contrast
    std::optional<std::uint64_t> seed;
};

enum class FitKind
{
    Window,
    PowerSeries,
    Global,
};

struct FitSpec
{
    FitKind kind = FitKind::Window;
    std::filesystem::path input;
    std::optional<double> init_center_hz;
    int background_order = 3;
};

// Everything a CLI run needs. Frequencies in the JSON document are linear Hz
// and powers are W; `system` is converted to rad/s on load.
struct RunConfig
{
    SystemParams system;
    std::vector<double> detunings_hz;  // Delta_+ / 2pi
    std::vector<double> powers_w;
    std::optional<double> sweep_power_w;
    std::optional<double> sweep_detuning_hz;
    std::vector<double> spectrum_grid_hz;  // absolute probe frequencies
    std::vector<double> mmit_grid_hz;      // probe offsets from the drive
    WindowSpec window;
    NoiseSpec noise;
    double power_cutoff_w = 0.022;
    bool write_spectra = true;
    std::filesystem::path output_dir;
    std::optional<FitSpec> fit;
    unsigned threads = 0;  // 0 picks hardware concurrency
};

// Parses and validates a JSON document. Throws ConfigError whose message is
// anchored as `<source>:<line>[:<col>]: ...`.
RunConfig parse_config(std::string_view text, const std::string& source_name = "config");
RunConfig load_config(const std::filesystem::path& path);
}  // namespace magnomech
