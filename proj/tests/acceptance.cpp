// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.

#define DOCTEST_CONFIG_DISABLE

#include "magnomech/backaction.hpp"
#include "magnomech/commands.hpp"
#include "magnomech/config.hpp"
#include "magnomech/inference.hpp"
#include "magnomech/io.hpp"
#include "magnomech/spectra.hpp"
#include "test_support.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

using namespace magnomech;
using magnomech::testing::reference_params;
using magnomech::testing::rel;
using magnomech::testing::symmetric_params;
namespace fs = std::filesystem;

namespace
{
struct Outcome
{
    bool pass = false;
    std::string detail;
};

double median(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

RunConfig reference_config()
{
    return load_config(fs::path(MAGNOMECH_CONFIGS) / "reference.json");
}

// 1. Scattering-rate difference against the self-energy damping.
Outcome oracle_equivalence()
{
    std::mt19937_64 rng(20261015);
    double worst = 0.0;
    int checked = 0;
    int failed = 0;
    for (int k = 0; k < 100; ++k) {
        const auto draw = magnomech::testing::draw_weak_coupling(rng);
        const BackactionResult r = gamma_mag(draw.params, draw.drive);
        if (!(std::abs(r.gamma_mag_exact) > 1e-3 * draw.params.gamma_b)) {
            continue;
        }
        ++checked;
        const double e = std::abs(r.gamma_mag_approx - r.gamma_mag_exact) / std::abs(r.gamma_mag_exact);
        worst = std::max(worst, e);
        failed += e >= 0.05;
    }
    return {checked > 0 && failed == 0,
            fmt("worst relative difference %.3g over %.0f checked sets, %.0f above 0.05", worst, checked, failed)};
}

// 2. Evasion root on the reference system.
Outcome evasion_root()
{
    const RunConfig cfg = reference_config();
    const SystemParams& p = cfg.system;
    const double power = cfg.sweep_power_w.value_or(0.0161);
    const HybridModes m = hybridize(p);
    const EvasionRoot root = find_evasion_detuning(p, power);

    const int n = 100000;
    const double h = (m.omega_plus - m.omega_minus) / (n - 1);
    double prev = gamma_mag(p, {m.omega_minus, power}).gamma_mag_corrected;
    bool bracketed = false;
    for (int k = 1; k < n; ++k) {
        const double x = m.omega_minus + h * k;
        const double f = gamma_mag(p, {x, power}).gamma_mag_corrected;
        if (std::signbit(f) != std::signbit(prev) && root.omega_d >= x - h && root.omega_d <= x) {
            bracketed = true;
        }
        prev = f;
    }
    const double residual = std::abs(gamma_mag(p, {root.omega_d, power}).gamma_mag_corrected);
    const double shift = std::abs(find_evasion_detuning(p, 10.0 * power).omega_d - root.omega_d);
    const double detuning = linear(root.omega_d - m.omega_plus);
    const bool between = root.omega_d > m.omega_minus && root.omega_d < m.omega_plus;
    const bool pass = bracketed && residual < 1e-6 * p.gamma_b && shift <= h && between
                      && std::abs(detuning + 12.02e6) < 4e6;
    return {pass, fmt("detuning %.6g MHz, |gamma(root)|/gamma_b %.2g, x10 power shift %.3g Hz, scan bracket %.0f",
                      detuning / 1e6, residual / p.gamma_b, linear(shift), bracketed)};
}

// 3. Power linearity and intrinsic linewidth extrapolation.
Outcome power_linearity()
{
    const SystemParams p = reference_params();
    const std::vector<double> detunings{-16.5e6, -14e6, -12.02e6, -10e6, -8e6};
    std::vector<double> powers;
    for (int k = 1; k <= 8; ++k) {
        powers.push_back(0.0025 * k);
    }
    double worst_line = 0.0;
    double worst_clean = 0.0;
    double worst_noisy = 0.0;
    std::uint64_t seed = 300;
    for (double det : detunings) {
        std::vector<double> g;
        std::vector<PowerPoint> clean;
        for (double power : powers) {
            const BackactionResult r = gamma_mag(p, drive_at_detuning(p, det, power));
            g.push_back(linear(r.gamma_mag_corrected));
            clean.push_back({power, linear(r.gamma_tot)});
        }
        double spp = 0.0;
        double spg = 0.0;
        for (std::size_t k = 0; k < powers.size(); ++k) {
            spp += powers[k] * powers[k];
            spg += powers[k] * g[k];
        }
        const double slope = spg / spp;
        double res = 0.0;
        double scale = 0.0;
        for (std::size_t k = 0; k < powers.size(); ++k) {
            res = std::max(res, std::abs(g[k] - slope * powers[k]));
            scale = std::max(scale, std::abs(g[k]));
        }
        worst_line = std::max(worst_line, res / scale);
        worst_clean = std::max(worst_clean, rel(fit_power_series(clean).intercept, 3745.0));

        std::vector<double> errors;
        for (int s = 0; s < 20; ++s) {
            std::mt19937_64 rng(seed++);
            std::normal_distribution<double> n(0.0, 0.02);
            auto noisy = clean;
            for (auto& pt : noisy) {
                pt.gamma_hz *= 1.0 + n(rng);
            }
            errors.push_back(rel(fit_power_series(noisy).intercept, 3745.0));
        }
        worst_noisy = std::max(worst_noisy, median(errors));
    }
    const bool pass = worst_line < 1e-9 && worst_clean < 1e-6 && worst_noisy < 0.03;
    return {pass, fmt("line residual %.2g, noiseless intercept error %.2g, 2%% noise median intercept error %.3g",
                      worst_line, worst_clean, worst_noisy)};
}

// 4. Coupling and correction recovery through the full pipeline.
Outcome global_recovery()
{
    RunConfig cfg = reference_config();
    const SystemParams& truth = cfg.system;
    const double g_true = linear(truth.g_mb0);
    const double a_true = linear(truth.alpha);

    std::vector<GammaPoint> forward;
    for (double det : cfg.detunings_hz) {
        for (double power : cfg.powers_w) {
            const BackactionResult r = gamma_mag(truth, drive_at_detuning(truth, det, power));
            forward.push_back({det, power, linear(r.gamma_mag_corrected), 1.0});
        }
    }
    const GlobalFit exact = fit_global(forward, truth);
    const double exact_err = std::max(rel(exact.g_mb0, g_true), rel(exact.alpha, a_true));

    std::vector<double> g_err;
    std::vector<double> a_err;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        cfg.noise.seed = seed;
        const PipelineResult r = run_pipeline(cfg);
        g_err.push_back(rel(r.global.g_mb0, g_true));
        a_err.push_back(rel(r.global.alpha, a_true));
    }
    const bool pass = exact_err < 1e-8 && median(g_err) < 0.05 && median(a_err) < 0.05;
    return {pass, fmt("noiseless %.2g, median g_mb0 error %.3g, median alpha error %.3g over 20 seeds", exact_err,
                      median(g_err), median(a_err))};
}

// 5. Fitted window width against the self-energy damping.
Outcome spectral_consistency()
{
    SystemParams p = reference_params();
    p.alpha = 0.0;
    double worst = 0.0;
    bool all_converged = true;
    for (double det : {-13e6, -12.02e6, -10e6}) {
        for (double power : {0.005, 0.0161, 0.02}) {
            const DriveConfig d = drive_at_detuning(p, det, power);
            const BackactionResult r = gamma_mag(p, d);
            const double width = linear(p.gamma_b + r.gamma_mag_exact);
            const double center = linear(p.omega_b + r.spring_shift);
            const Spectrum s = mmit_spectrum(p, d, linspace(center - 8.0 * width, center + 8.0 * width, 4001));
            const WindowFit fit = fit_window(s, linear(p.omega_b));
            all_converged = all_converged && fit.converged;
            worst = std::max(worst, rel(fit.fwhm, width));
        }
    }

    const SystemParams ref = reference_params();
    const DriveConfig d = drive_at_detuning(ref, -12.02e6, 0.0161);
    const BackactionResult r = gamma_mag(ref, d);
    const double width = linear(r.gamma_tot);
    const double center = linear(ref.omega_b + r.spring_shift);
    const WindowFit upper =
        fit_window(mmit_spectrum(ref, d, linspace(center - 8.0 * width, center + 8.0 * width, 4001)), center);
    const WindowFit lower =
        fit_window(mmit_spectrum(ref, d, linspace(-center - 8.0 * width, -center + 8.0 * width, 4001)), -center);
    const bool flip = upper.converged && lower.converged && upper.transparency() > 0.0 && lower.transparency() < 0.0;
    return {all_converged && worst < 0.02 && flip,
            fmt("worst width error %.3g, upper transparency %.3g, lower transparency %.3g", worst,
                upper.transparency(), lower.transparency())};
}

// 6. Symmetric and zero-power nulls.
Outcome symmetry_nulls()
{
    const SystemParams p = symmetric_params();
    const HybridModes m = hybridize(p);
    const BackactionResult r = gamma_mag(p, {0.5 * (m.omega_plus + m.omega_minus), 0.0161});
    const double null = std::abs(r.gamma_mag_exact) / r.gamma_plus;

    const SystemParams ref = reference_params();
    bool zero = true;
    for (double det : {-20e6, -12.02e6, -5e6, 3e6}) {
        const BackactionResult z = gamma_mag(ref, drive_at_detuning(ref, det, 0.0));
        zero = zero && z.sigma == Complex(0.0, 0.0) && z.gamma_mag_exact == 0.0 && z.gamma_plus == 0.0
               && z.gamma_minus == 0.0 && z.gamma_mag_approx == 0.0 && z.gamma_mag_corrected == 0.0
               && z.spring_shift == 0.0 && z.magnon_population == 0.0 && z.gamma_tot == ref.gamma_b;
    }
    return {null < 1e-12 && zero, fmt("|gamma_mag|/gamma_plus %.2g at midpoint, zero-power fields exact %.0f", null,
                                      zero)};
}

std::map<std::string, std::string> tree(const fs::path& dir)
{
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (e.is_regular_file()) {
            files[fs::relative(e.path(), dir).string()] = io::read_file(e.path());
        }
    }
    return files;
}

// 7. Byte-identical pipeline artifacts.
Outcome determinism()
{
    RunConfig cfg = reference_config();
    cfg.write_spectra = true;
    const fs::path base = fs::temp_directory_path() / "magnomech_acceptance";
    fs::remove_all(base);
    std::vector<std::map<std::string, std::string>> trees;
    for (const char* name : {"a", "b"}) {
        ArtifactWriter out(base / name);
        run_pipeline(cfg, &out);
        trees.push_back(tree(base / name));
    }
    std::size_t bytes = 0;
    for (const auto& [path, content] : trees[0]) {
        bytes += content.size();
    }
    const bool same = trees[0] == trees[1];
    fs::remove_all(base);
    return {same && trees[0].size() > 3, fmt("%.0f files, %.0f bytes, identical %.0f", trees[0].size(), bytes, same)};
}

struct Criterion
{
    int id;
    const char* name;
    double limit_s;  // 0 when no runtime bound applies
    std::function<Outcome()> check;
};
}  // namespace

int main()
{
    const std::vector<Criterion> criteria{
        {1, "oracle equivalence", 10.0, oracle_equivalence},
        {2, "evasion root", 5.0, evasion_root},
        {3, "power linearity", 0.0, power_linearity},
        {4, "global fit recovery", 60.0, global_recovery},
        {5, "spectral consistency", 0.0, spectral_consistency},
        {6, "symmetry nulls", 0.0, symmetry_nulls},
        {7, "determinism", 0.0, determinism},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = c.limit_s == 0.0 || seconds < c.limit_s;
        const bool pass = o.pass && in_time;
        failures += !pass;
        std::printf("%s criterion %d (%s): %s; %.2f s", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(),
                    seconds);
        if (c.limit_s > 0.0) {
            std::printf(" (limit %.0f s)", c.limit_s);
        }
        std::printf("\n");
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
