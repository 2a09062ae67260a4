#include "magnomech/commands.hpp"
#include "magnomech/errors.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <map>
#include <string>

using namespace magnomech;

namespace
{
constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

std::filesystem::path output_dir(const RunConfig& cfg, const std::string& flag)
{
    if (!flag.empty()) {
        return flag;
    }
    if (!cfg.output_dir.empty()) {
        return cfg.output_dir;
    }
    return "magnomech_out";
}

int run(const std::string& command, const std::string& config_path, const std::string& out_flag,
        std::optional<std::uint64_t> seed, SweepAxis axis)
{
    RunConfig cfg;
    try {
        cfg = load_config(config_path);
        if (seed) {
            cfg.noise.seed = seed;
        }
        if (command == "synth" || command == "pipeline") {
            require_seed(cfg);
        }
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    }

    // Every command renders into a buffer first so a failure never leaves
    // partial output on stdout.
    std::string stdout_text;
    try {
        if (command == "hybridize") {
            stdout_text = hybridize_report(cfg).dump(2) + "\n";
        } else if (command == "sweep") {
            stdout_text = sweep_csv(cfg, axis);
            if (!out_flag.empty()) {
                ArtifactWriter writer(out_flag);
                writer.write(axis == SweepAxis::Detuning ? "sweep_detuning.csv" : "sweep_power.csv", stdout_text);
                writer.finish();
            }
        } else if (command == "find-evasion") {
            stdout_text = find_evasion_report(cfg).dump(2) + "\n";
        } else if (command == "synth") {
            ArtifactWriter writer(output_dir(cfg, out_flag));
            run_synth(cfg, writer);
            writer.finish();
            stdout_text = writer.dir().string() + "\n";
        } else if (command == "fit") {
            stdout_text = run_fit(cfg).dump(2) + "\n";
        } else if (command == "pipeline") {
            ArtifactWriter writer(output_dir(cfg, out_flag));
            const PipelineResult result = run_pipeline(cfg, &writer);
            stdout_text = result.report.dump(2) + "\n";
        }
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << command << ": " << e.what() << '\n';
        return kExitRuntime;
    }
    std::cout << stdout_text << std::flush;
    return kExitOk;
}
}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Cavity magnomechanics: hybrid modes, dynamical backaction, MMIT spectra and fits"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_flag;
    std::optional<std::uint64_t> seed;
    SweepAxis axis = SweepAxis::Detuning;
    const std::map<std::string, SweepAxis> axis_names{{"detuning", SweepAxis::Detuning}, {"power", SweepAxis::Power}};

    for (const char* name : {"hybridize", "sweep", "find-evasion", "synth", "fit", "pipeline"}) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "JSON configuration")->required();
        sub->add_option("--out", out_flag, "output directory");
        sub->add_option("--seed", seed, "noise seed (overrides the config)");
        sub->add_option("--axis", axis, "sweep axis")->transform(CLI::CheckedTransformer(axis_names, CLI::ignore_case));
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }
    return run(app.get_subcommands().front()->get_name(), config_path, out_flag, seed, axis);
}
