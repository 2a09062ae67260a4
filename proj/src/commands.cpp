#include "magnomech/commands.hpp"

#include "magnomech/backaction.hpp"
#include "magnomech/errors.hpp"
#include "magnomech/spectra.hpp"
#include "magnomech/units.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <thread>

namespace magnomech
{
using io::json;

namespace
{
std::string index_tag(char prefix, std::size_t k)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%c%03zu", prefix, k);
    return buf;
}

double require_power(const RunConfig& cfg)
{
    if (cfg.sweep_power_w) {
        return *cfg.sweep_power_w;
    }
    if (!cfg.powers_w.empty()) {
        return cfg.powers_w.front();
    }
    throw ConfigError("config: sweep.power_w or drive.powers_w is required");
}

double require_detuning(const RunConfig& cfg)
{
    if (cfg.sweep_detuning_hz) {
        return *cfg.sweep_detuning_hz;
    }
    if (!cfg.detunings_hz.empty()) {
        return cfg.detunings_hz.front();
    }
    throw ConfigError("config: sweep.detuning_hz or drive.detunings_hz is required");
}

// Runs body(k) for k in [0, count) on up to `threads` workers; results are
// written by index so ordering never depends on scheduling.
template <typename Body>
void parallel_for(std::size_t count, unsigned threads, Body body)
{
    if (threads == 0) {
        threads = std::max(1u, std::thread::hardware_concurrency());
    }
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(count, 1)));
    std::vector<std::exception_ptr> errors(count);
    auto worker = [&](unsigned id) {
        for (std::size_t k = id; k < count; k += threads) {
            try {
                body(k);
            } catch (...) {
                errors[k] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < threads; ++t) {
        pool.emplace_back(worker, t);
    }
    worker(0);
    for (auto& th : pool) {
        th.join();
    }
    for (auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}
}  // namespace

ArtifactWriter::ArtifactWriter(std::filesystem::path dir) : dir_(std::move(dir))
{
    std::filesystem::create_directories(dir_);
}

void ArtifactWriter::write(const std::string& relative_path, std::string_view content)
{
    io::write_file(dir_ / relative_path, content);
    files_.push_back({{"path", relative_path}, {"sha256", io::sha256_hex(content)}, {"bytes", content.size()}});
}

void ArtifactWriter::write_spectrum(const std::string& relative_csv, const Spectrum& s)
{
    std::filesystem::path sidecar(relative_csv);
    sidecar.replace_extension(".json");
    write(relative_csv, io::spectrum_csv(s));
    write(sidecar.string(), io::spectrum_meta_json(s.meta).dump(2) + "\n");
}

void ArtifactWriter::finish(const std::string& failed_stage, const std::string& error)
{
    json manifest;
    manifest["status"] = failed_stage.empty() ? "ok" : "failed";
    if (!failed_stage.empty()) {
        manifest["failed_stage"] = failed_stage;
        manifest["error"] = error;
    }
    manifest["files"] = files_;
    io::write_file(dir_ / "manifest.json", manifest.dump(2) + "\n");
}

void require_seed(const RunConfig& cfg)
{
    if (cfg.noise.sigma > 0.0 && !cfg.noise.seed) {
        throw ConfigError("config: noise.seed is required when noise.sigma > 0 (or pass --seed)");
    }
}

json hybridize_report(const RunConfig& cfg)
{
    const HybridModes modes = hybridize(cfg.system);
    json j = io::to_json(modes);
    j["detuning_am_hz"] = linear(cfg.system.detuning_am());
    j["resolved_sideband"] = cfg.system.is_resolved();
    return j;
}

std::string sweep_csv(const RunConfig& cfg, SweepAxis axis)
{
    std::vector<double> xs;
    if (axis == SweepAxis::Detuning) {
        xs = cfg.detunings_hz;
        if (xs.empty()) {
            throw ConfigError("config: drive.detunings_hz must be non-empty for a detuning sweep");
        }
    } else {
        xs = cfg.powers_w;
        if (xs.empty()) {
            throw ConfigError("config: drive.powers_w must be non-empty for a power sweep");
        }
    }
    const double fixed = axis == SweepAxis::Detuning ? require_power(cfg) : require_detuning(cfg);

    std::vector<BackactionResult> rows(xs.size());
    parallel_for(xs.size(), cfg.threads, [&](std::size_t k) {
        const double detuning = axis == SweepAxis::Detuning ? xs[k] : fixed;
        const double power = axis == SweepAxis::Detuning ? fixed : xs[k];
        rows[k] = gamma_mag(cfg.system, drive_at_detuning(cfg.system, detuning, power));
    });

    std::string out = "x,gamma_plus,gamma_minus,gamma_mag_approx,gamma_mag_exact,gamma_mag_corrected,gamma_tot,spring_shift\n";
    for (std::size_t k = 0; k < xs.size(); ++k) {
        const auto& r = rows[k];
        for (double v : {xs[k], linear(r.gamma_plus), linear(r.gamma_minus), linear(r.gamma_mag_approx),
                         linear(r.gamma_mag_exact), linear(r.gamma_mag_corrected), linear(r.gamma_tot)}) {
            out += io::format_double(v);
            out += ',';
        }
        out += io::format_double(linear(r.spring_shift));
        out += '\n';
    }
    return out;
}

json find_evasion_report(const RunConfig& cfg)
{
    const double power = require_power(cfg);
    const HybridModes modes = hybridize(cfg.system);
    const EvasionRoot root = find_evasion_detuning(cfg.system, power);
    const CutoffResult cutoff = evasion_cutoff_splitting(cfg.system, power);

    json j;
    j["power_w"] = power;
    j["modes"] = io::to_json(modes);
    j["root"] = io::to_json(root);
    j["detuning_plus_hz"] = linear(root.omega_d - modes.omega_plus);
    j["detuning_minus_hz"] = linear(root.omega_d - modes.omega_minus);
    j["cutoff_splitting_hz"] = linear(cutoff.splitting);
    j["cutoff_bounded"] = cutoff.bounded;
    return j;
}

void run_synth(const RunConfig& cfg, ArtifactWriter& out)
{
    require_seed(cfg);
    const std::uint64_t seed = cfg.noise.seed.value_or(0);
    std::uint64_t stream = 0;
    auto noisy = [&](const Spectrum& s) {
        const double sigma = cfg.noise.relative ? cfg.noise.sigma * window_contrast(s) : cfg.noise.sigma;
        return sigma > 0.0 ? add_noise(s, sigma, seed + stream++) : s;
    };

    bool any = false;
    if (!cfg.spectrum_grid_hz.empty()) {
        out.write_spectrum("normal_mode.csv", noisy(normal_mode_spectrum(cfg.system, cfg.spectrum_grid_hz)));
        any = true;
    }
    if (!cfg.mmit_grid_hz.empty()) {
        if (cfg.detunings_hz.empty() || cfg.powers_w.empty()) {
            throw ConfigError("config: mmit synthesis needs drive.detunings_hz and drive.powers_w");
        }
        for (std::size_t i = 0; i < cfg.detunings_hz.size(); ++i) {
            for (std::size_t j = 0; j < cfg.powers_w.size(); ++j) {
                const DriveConfig drive = drive_at_detuning(cfg.system, cfg.detunings_hz[i], cfg.powers_w[j]);
                const Spectrum s = mmit_spectrum(cfg.system, drive, cfg.mmit_grid_hz);
                out.write_spectrum("mmit_" + index_tag('d', i) + "_" + index_tag('p', j) + ".csv", noisy(s));
            }
        }
        any = true;
    }
    if (!any) {
        throw ConfigError("config: synth needs spectrum.grid or mmit.grid");
    }
}

json run_fit(const RunConfig& cfg)
{
    if (!cfg.fit) {
        throw ConfigError("config: fit section is required");
    }
    const FitSpec& spec = *cfg.fit;
    std::string text;
    try {
        text = io::read_file(spec.input);
    } catch (const Error& e) {
        throw ConfigError(std::string("config: fit.input: ") + e.what());
    }

    json j;
    switch (spec.kind) {
    case FitKind::Window: {
        Spectrum s = io::read_spectrum(spec.input);
        double center = 0.5 * (s.freq.front() + s.freq.back());
        if (spec.init_center_hz) {
            center = *spec.init_center_hz;
        } else if (s.meta.frame == FrequencyFrame::DriveOffset && s.meta.params) {
            const double phonon = linear(s.meta.params->omega_b);
            if (phonon >= s.freq.front() && phonon <= s.freq.back()) {
                center = phonon;
            }
        }
        WindowFitOptions opts;
        opts.background_order = spec.background_order;
        j["kind"] = "window";
        j["fit"] = io::to_json(fit_window(s, center, opts));
        break;
    }
    case FitKind::PowerSeries: {
        const auto points = io::parse_power_csv(text);
        j["kind"] = "power_series";
        j["fit"] = io::to_json(fit_power_series(points));
        break;
    }
    case FitKind::Global: {
        const auto data = io::parse_dataset_csv(text);
        j["kind"] = "global";
        j["fit"] = io::to_json(fit_global(data, cfg.system));
        break;
    }
    }
    return j;
}

PipelineResult run_pipeline(const RunConfig& cfg, ArtifactWriter* out)
{
    if (cfg.powers_w.empty()) {
        throw ConfigError("config: drive.powers_w must be non-empty");
    }
    if (cfg.detunings_hz.empty()) {
        throw ConfigError("config: drive.detunings_hz must be non-empty");
    }
    require_seed(cfg);

    const SystemParams& truth = cfg.system;
    const std::size_t nd = cfg.detunings_hz.size();
    const std::size_t np = cfg.powers_w.size();
    const std::uint64_t seed = cfg.noise.seed.value_or(0);

    PipelineResult result;
    result.windows.resize(nd * np);
    std::vector<Spectrum> spectra(cfg.write_spectra && out ? nd * np : 0);

    std::string stage = "synthesize";
    try {
        parallel_for(nd * np, cfg.threads, [&](std::size_t k) {
            const std::size_t i = k / np;
            const std::size_t j = k % np;
            WindowRecord& rec = result.windows[k];
            rec.detuning_hz = cfg.detunings_hz[i];
            rec.power = cfg.powers_w[j];

            const DriveConfig drive = drive_at_detuning(truth, rec.detuning_hz, rec.power);
            const BackactionResult ba = gamma_mag(truth, drive);
            if (ba.unstable) {
                throw StageError("synthesize", "total mechanical linewidth is negative (parametric instability)");
            }
            rec.truth_gamma_tot_hz = linear(ba.gamma_tot);
            const double center = linear(truth.omega_b + ba.spring_shift);
            const double half = cfg.window.half_span_linewidths * rec.truth_gamma_tot_hz;
            const auto grid = linspace(center - half, center + half, cfg.window.points);

            Spectrum s = mmit_spectrum(truth, drive, grid);
            const double sigma = cfg.noise.relative ? cfg.noise.sigma * window_contrast(s) : cfg.noise.sigma;
            s = add_noise(s, sigma, seed + k);

            double init = linear(truth.omega_b);
            if (init < grid.front() || init > grid.back()) {
                init = 0.5 * (grid.front() + grid.back());
            }
            WindowFitOptions opts;
            opts.background_order = cfg.window.background_order;
            rec.fit = fit_window(s, init, opts);
            if (!rec.fit.converged) {
                throw StageError("fit_window", "window fit did not converge at detuning " + io::format_double(rec.detuning_hz)
                                                   + " Hz, power " + io::format_double(rec.power) + " W");
            }
            if (!spectra.empty()) {
                spectra[k] = std::move(s);
            }
        });

        if (out) {
            for (std::size_t k = 0; k < spectra.size(); ++k) {
                out->write_spectrum("spectra/window_" + index_tag('d', k / np) + "_" + index_tag('p', k % np) + ".csv",
                                    spectra[k]);
            }
            std::string table = "detuning_hz,power_w,gamma_tot_hz,gamma_tot_err_hz,center_hz,transparency,truth_gamma_tot_hz\n";
            for (const auto& w : result.windows) {
                for (double v : {w.detuning_hz, w.power, w.fit.fwhm, w.fit.fwhm_err, w.fit.center, w.fit.transparency()}) {
                    table += io::format_double(v) + ',';
                }
                table += io::format_double(w.truth_gamma_tot_hz) + '\n';
            }
            out->write("gamma_table.csv", table);
        }

        stage = "fit_power_series";
        double weight_sum = 0.0;
        double weighted = 0.0;
        double plain = 0.0;
        bool all_weighted = true;
        for (std::size_t i = 0; i < nd; ++i) {
            std::vector<PowerPoint> pts;
            for (std::size_t j = 0; j < np; ++j) {
                const auto& w = result.windows[i * np + j];
                if (w.power <= cfg.power_cutoff_w) {
                    pts.push_back({w.power, w.fit.fwhm});
                }
            }
            PowerSeriesFit fit = fit_power_series(pts);
            const double err = fit.intercept_err();
            if (err > 0.0) {
                weight_sum += 1.0 / (err * err);
                weighted += fit.intercept / (err * err);
            } else {
                all_weighted = false;
            }
            plain += fit.intercept;
            result.power_series.push_back(std::move(fit));
        }
        if (all_weighted && weight_sum > 0.0) {
            result.gamma_b_hz = weighted / weight_sum;
            result.gamma_b_err_hz = 1.0 / std::sqrt(weight_sum);
        } else {
            result.gamma_b_hz = plain / static_cast<double>(nd);
            result.gamma_b_err_hz = 0.0;
        }

        stage = "fit_global";
        for (const auto& w : result.windows) {
            if (w.power > cfg.power_cutoff_w) {
                ++result.excluded;
                continue;
            }
            result.dataset.push_back({w.detuning_hz, w.power, w.fit.fwhm - result.gamma_b_hz, 1.0});
        }
        result.global = fit_global(result.dataset, truth);
    } catch (const StageError& e) {
        if (out) {
            out->finish(e.stage(), e.what());
        }
        throw;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        if (out) {
            out->finish(stage, e.what());
        }
        throw StageError(stage, e.what());
    }

    auto rel = [](double got, double want) { return want != 0.0 ? (got - want) / want : got; };
    json report;
    report["status"] = "ok";
    report["truth"] = {{"gamma_b_hz", linear(truth.gamma_b)},
                       {"g_mb0_hz", linear(truth.g_mb0)},
                       {"alpha_hz", linear(truth.alpha)}};
    report["recovered"] = {{"gamma_b_hz", result.gamma_b_hz},
                           {"gamma_b_err_hz", result.gamma_b_err_hz},
                           {"g_mb0_hz", result.global.g_mb0},
                           {"g_mb0_err_hz", result.global.g_mb0_err()},
                           {"alpha_hz", result.global.alpha},
                           {"alpha_err_hz", result.global.alpha_err()}};
    report["relative_error"] = {{"gamma_b", rel(result.gamma_b_hz, linear(truth.gamma_b))},
                                {"g_mb0", rel(result.global.g_mb0, linear(truth.g_mb0))},
                                {"alpha", rel(result.global.alpha, linear(truth.alpha))}};
    json series = json::array();
    for (std::size_t i = 0; i < nd; ++i) {
        json entry = io::to_json(result.power_series[i]);
        entry["detuning_hz"] = cfg.detunings_hz[i];
        series.push_back(entry);
    }
    report["power_series"] = series;
    report["global_fit"] = io::to_json(result.global);
    report["power_cutoff_w"] = cfg.power_cutoff_w;
    report["excluded_points"] = result.excluded;
    report["noise"] = {{"sigma", cfg.noise.sigma}, {"relative", cfg.noise.relative}, {"seed", seed}};
    result.report = report;

    if (out) {
        out->write("dataset.csv", io::dataset_csv(result.dataset));
        out->write("report.json", report.dump(2) + "\n");
        out->finish();
    }
    return result;
}
}  // namespace magnomech
