#include "magnomech/config.hpp"
#include "magnomech/errors.hpp"
#include "magnomech/io.hpp"
#include "magnomech/spectra.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <bit>
#include <cstring>
#include <filesystem>
#include <random>

using namespace magnomech;
using magnomech::testing::reference_params;

namespace
{
// Doubles with arbitrary bit patterns, skipping NaN and infinity.
double random_double(std::mt19937_64& rng)
{
    for (;;) {
        const double x = std::bit_cast<double>(rng());
        if (std::isfinite(x)) {
            return x;
        }
    }
}

const char* kMinimal = R"({
  "system": {
    "cavity_hz": 7.1e9,
    "splitting_hz": 21e6,
    "kappa_hz": 2e6,
    "kappa_ext_hz": 1e6,
    "gamma_m_hz": 1.5e6,
    "phonon_hz": 12.45e6,
    "gamma_b_hz": 3745,
    "g_am_hz": 9.34e6
  }
})";

std::string with_section(const std::string& section)
{
    std::string s = kMinimal;
    s.insert(s.rfind('}'), ",\n" + section + "\n");
    return s;
}

std::string config_error(const std::string& text)
{
    try {
        parse_config(text, "cfg.json");
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

std::filesystem::path scratch_dir(const std::string& name)
{
    const auto dir = std::filesystem::temp_directory_path() / ("magnomech_io_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}
}  // namespace

TEST_CASE("Io.FormatDoubleRoundTripsExactly")
{
    std::mt19937_64 rng(17);
    for (int k = 0; k < 100000; ++k) {
        const double x = random_double(rng);
        const double y = std::strtod(io::format_double(x).c_str(), nullptr);
        INFO(io::format_double(x));
        CHECK_EQ(std::bit_cast<std::uint64_t>(x), std::bit_cast<std::uint64_t>(y));
    }
}

TEST_CASE("Io.SpectrumCsvBitExact")
{
    std::mt19937_64 rng(5);
    Spectrum s;
    double f = -1e9;
    for (int k = 0; k < 2000; ++k) {
        f += 1.0 + static_cast<double>(rng() % 1000) * 1e-3;
        s.freq.push_back(f);
        s.response.emplace_back(random_double(rng), random_double(rng));
    }
    const Spectrum back = io::parse_spectrum_csv(io::spectrum_csv(s));
    REQUIRE_EQ(back.size(), s.size());
    CHECK_EQ(0, std::memcmp(back.freq.data(), s.freq.data(), s.size() * sizeof(double)));
    CHECK_EQ(0, std::memcmp(back.response.data(), s.response.data(), s.size() * sizeof(Complex)));
    CHECK_EQ(io::spectrum_csv(s).substr(0, 16), "freq_hz,re_s,im_");
}

TEST_CASE("Io.SpectrumSidecarRoundTrip")
{
    const SystemParams p = reference_params();
    const DriveConfig d = drive_at_detuning(p, -12.02e6, 0.0161);
    Spectrum s = add_noise(mmit_spectrum(p, d, linspace(12.44e6, 12.46e6, 101)), 0.003, 99);
    const auto dir = scratch_dir("sidecar");
    const auto [csv, sidecar] = io::write_spectrum(s, dir / "w.csv");
    CHECK(std::filesystem::exists(sidecar));
    const Spectrum back = io::read_spectrum(csv);
    CHECK_EQ(back.freq, s.freq);
    CHECK_EQ(back.response, s.response);
    CHECK_EQ(back.meta.kind, SpectrumKind::Mmit);
    CHECK_EQ(back.meta.frame, FrequencyFrame::DriveOffset);
    REQUIRE((back.meta.params && back.meta.drive && back.meta.noise));
    CHECK_EQ(back.meta.params->g_mb0, p.g_mb0);
    CHECK_EQ(back.meta.params->omega_m, p.omega_m);
    CHECK_EQ(back.meta.params->alpha, p.alpha);
    CHECK_EQ(back.meta.drive->omega_d, d.omega_d);
    CHECK_EQ(back.meta.drive->power, d.power);
    CHECK_EQ(back.meta.noise->seed, 99u);
    CHECK_EQ(back.meta.noise->sigma, 0.003);
    std::filesystem::remove_all(dir);
}

TEST_CASE("Io.SpectrumCsvRejectsBadInput")
{
    CHECK_THROWS_AS(io::parse_spectrum_csv("f,re,im\n1,2,3\n"), Error);
    CHECK_THROWS_AS(io::parse_spectrum_csv("freq_hz,re_s,im_s\n1,2\n"), Error);
    CHECK_THROWS_AS(io::parse_spectrum_csv("freq_hz,re_s,im_s\n1,abc,3\n"), Error);
}

TEST_CASE("Io.DatasetCsvRoundTrip")
{
    std::mt19937_64 rng(8);
    std::vector<GammaPoint> data;
    for (int k = 0; k < 50; ++k) {
        data.push_back({random_double(rng), random_double(rng), random_double(rng), random_double(rng)});
    }
    const auto back = io::parse_dataset_csv(io::dataset_csv(data));
    REQUIRE_EQ(back.size(), data.size());
    for (std::size_t k = 0; k < data.size(); ++k) {
        CHECK_EQ(back[k].detuning_hz, data[k].detuning_hz);
        CHECK_EQ(back[k].power, data[k].power);
        CHECK_EQ(back[k].gamma_hz, data[k].gamma_hz);
        CHECK_EQ(back[k].weight, data[k].weight);
    }
    const auto unweighted = io::parse_dataset_csv("detuning_hz,power_w,gamma_hz\n-1e7,0.01,250\n");
    REQUIRE_EQ(unweighted.size(), 1u);
    CHECK_EQ(unweighted[0].weight, 1.0);
}

TEST_CASE("Io.ExactParamsRoundTrip")
{
    const SystemParams p = reference_params();
    const SystemParams back = io::parse_system_params_exact(io::system_params_exact_json(p));
    CHECK_EQ(back.omega_a, p.omega_a);
    CHECK_EQ(back.omega_m, p.omega_m);
    CHECK_EQ(back.kappa_ext, p.kappa_ext);
    CHECK_EQ(back.gamma_b, p.gamma_b);
    CHECK_EQ(back.alpha, p.alpha);
}

TEST_CASE("Io.Sha256KnownVectors")
{
    CHECK_EQ(io::sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK_EQ(io::sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK_EQ(io::sha256_hex("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq"),
              "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
    CHECK_EQ(io::sha256_hex(std::string(1000000, 'a')),
              "cdc76e5c9914fb9281a1c7e284d73e67f1809a48a497200e046d39ccc7112cd0");
}

TEST_CASE("Config.MinimalSystem")
{
    const RunConfig cfg = parse_config(kMinimal);
    const SystemParams p = reference_params();
    CHECK_NEAR(cfg.system.omega_m, p.omega_m, 1e-12 * p.omega_m);
    CHECK_EQ(cfg.system.g_mb0, 0.0);
    CHECK_NEAR(linear(hybridize(cfg.system).splitting), 21e6, 1e-6);
    CHECK_LT(cfg.system.omega_m, cfg.system.omega_a);
    CHECK_FALSE(cfg.noise.seed.has_value());
}

TEST_CASE("Config.MagnonAboveSide")
{
    std::string s = kMinimal;
    s.insert(s.find("\"kappa_hz\""), "\"magnon_side\": \"above\",\n    ");
    const RunConfig cfg = parse_config(s);
    CHECK_GT(cfg.system.omega_m, cfg.system.omega_a);
    CHECK_NEAR(linear(hybridize(cfg.system).splitting), 21e6, 1e-6);
}

TEST_CASE("Config.GridForms")
{
    const RunConfig cfg = parse_config(with_section(
        R"("drive": {"detunings_hz": {"start": -14e6, "stop": -10e6, "points": 5}, "powers_w": [0.002, 0.02]})"));
    CHECK_EQ(cfg.detunings_hz, (std::vector<double>{-14e6, -13e6, -12e6, -11e6, -10e6}));
    CHECK_EQ(cfg.powers_w, (std::vector<double>{0.002, 0.02}));
}

TEST_CASE("Config.MalformedJsonReportsLineAndColumn")
{
    const std::string text = "{\n  \"system\": {\n    \"cavity_hz\": 7.1e9,,\n  }\n}\n";
    const std::string msg = config_error(text);
    INFO(msg);
    CHECK_EQ(msg.rfind("cfg.json:3:", 0), 0u);
    CHECK_NE(msg.find("malformed JSON"), std::string::npos);
}

TEST_CASE("Config.UnknownKeyReportsPathAndLine")
{
    const std::string msg = config_error(with_section(R"("noise": {"sigma": 0.01, "sead": 3})"));
    INFO(msg);
    CHECK_NE(msg.find("noise.sead: unknown key"), std::string::npos);
    CHECK_EQ(msg.rfind("cfg.json:13:", 0), 0u);
    CHECK_NE(config_error(with_section(R"("extra": 1)")).find("extra: unknown key"), std::string::npos);
}

TEST_CASE("Config.SemanticErrors")
{
    CHECK_NE(config_error("{}").find("system: missing required section"), std::string::npos);
    CHECK_NE(config_error(with_section(R"("drive": {"powers_w": []})")).find("drive.powers_w: grid is empty"),
              std::string::npos);
    CHECK_NE(config_error(with_section(R"("drive": {"powers_w": [0.01, -0.01]})")).find("non-negative"),
              std::string::npos);
    CHECK_NE(config_error(with_section(R"("mmit": {"grid": [1, 3, 2]})")).find("mmit.grid"), std::string::npos);
    CHECK_NE(config_error(with_section(R"("noise": {"sigma": -1})")).find("noise.sigma"), std::string::npos);
    CHECK_NE(config_error(with_section(R"("fit": {"kind": "magic", "input": "x.csv"})")).find("fit.kind"),
              std::string::npos);

    std::string both = kMinimal;
    both.insert(both.find("\"kappa_hz\""), "\"magnon_hz\": 7.09e9,\n    ");
    CHECK_NE(config_error(both).find("exactly one"), std::string::npos);

    std::string narrow = kMinimal;
    narrow.replace(narrow.find("21e6"), 4, "15e6");
    CHECK_NE(config_error(narrow).find("system.splitting_hz"), std::string::npos);

    std::string lossy = kMinimal;
    lossy.replace(lossy.find("\"kappa_ext_hz\": 1e6"), 19, "\"kappa_ext_hz\": 3e6");
    CHECK_NE(config_error(lossy).find("system."), std::string::npos);

    std::string wrong_type = kMinimal;
    wrong_type.replace(wrong_type.find("3745"), 4, "\"x\"");
    CHECK_NE(config_error(wrong_type).find("system.gamma_b_hz: expected a number"), std::string::npos);
}

TEST_CASE("Config.LoadResolvesRelativePaths")
{
    const auto dir = scratch_dir("load");
    io::write_file(dir / "c.json",
                   with_section(R"("output_dir": "out", "fit": {"kind": "global", "input": "data/d.csv"})"));
    const RunConfig cfg = load_config(dir / "c.json");
    CHECK_EQ(cfg.output_dir, dir / "out");
    REQUIRE(cfg.fit.has_value());
    CHECK_EQ(cfg.fit->input, dir / "data/d.csv");
    CHECK_EQ(cfg.fit->kind, FitKind::Global);

    try {
        load_config(dir / "missing.json");
        FAIL_CHECK("expected an exception");
    } catch (const ConfigError& e) {
        CHECK_NE(std::string(e.what()).find("missing.json:0:"), std::string::npos);
    }
    std::filesystem::remove_all(dir);
}
