#pragma once

#include "magnomech/config.hpp"
#include "magnomech/errors.hpp"
#include "magnomech/inference.hpp"
#include "magnomech/io.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace magnomech
{
enum class SweepAxis
{
    Detuning,
    Power,
};

// A pipeline or command stage failed at runtime (exit code 3).
class StageError : public Error
{
public:
    StageError(std::string stage, const std::string& what) : Error(stage + ": " + what), stage_(std::move(stage)) {}
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

// Collects output files and records their SHA-256 in manifest.json.
class ArtifactWriter
{
public:
    explicit ArtifactWriter(std::filesystem::path dir);

    void write(const std::string& relative_path, std::string_view content);
    void write_spectrum(const std::string& relative_csv, const Spectrum& s);

    // Writes manifest.json; `failed_stage` empty on success.
    void finish(const std::string& failed_stage = {}, const std::string& error = {});

    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path dir_;
    io::json files_ = io::json::array();
};

io::json hybridize_report(const RunConfig& cfg);

// CSV rows `x,gamma_plus,gamma_minus,gamma_mag_approx,gamma_mag_exact,gamma_mag_corrected,gamma_tot,spring_shift`
// with rates in Hz; x is Delta_+/2pi (Hz) or power (W).
std::string sweep_csv(const RunConfig& cfg, SweepAxis axis);

// Throws NoRoot when the drive scan finds no evasion point.
io::json find_evasion_report(const RunConfig& cfg);

void run_synth(const RunConfig& cfg, ArtifactWriter& out);

io::json run_fit(const RunConfig& cfg);

struct WindowRecord
{
    double detuning_hz = 0.0;
    double power = 0.0;
    double truth_gamma_tot_hz = 0.0;
    WindowFit fit;
};

struct PipelineResult
{
    std::vector<WindowRecord> windows;        // detuning-major order
    std::vector<PowerSeriesFit> power_series;  // one per detuning
    double gamma_b_hz = 0.0;
    double gamma_b_err_hz = 0.0;
    std::vector<GammaPoint> dataset;
    GlobalFit global;
    std::size_t excluded = 0;  // points above the power cutoff
    io::json report;
};

// Synthesizes noisy MMIT windows over the (detuning, power) grid, fits them,
// extrapolates the intrinsic linewidth and fits (g_mb0, alpha) globally.
// Noise seed for window k (detuning-major) is seed + k. Writes artifacts
// when `out` is given. Throws StageError naming the failing stage.
PipelineResult run_pipeline(const RunConfig& cfg, ArtifactWriter* out = nullptr);

// Rejects configurations whose noise has no seed.
void require_seed(const RunConfig& cfg);
}  // namespace magnomech
