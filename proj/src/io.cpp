#include "magnomech/io.hpp"

#include "magnomech/errors.hpp"
#include "magnomech/units.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

namespace magnomech::io
{
namespace
{
std::vector<std::string_view> split(std::string_view line, char sep)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(sep, start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) {
            break;
        }
        start = pos + 1;
    }
    return out;
}

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

double parse_number(std::string_view field, std::size_t line_no)
{
    field = trim(field);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
        throw Error("line " + std::to_string(line_no) + ": cannot parse number '" + std::string(field) + "'");
    }
    return value;
}

// Rows of numeric fields below a header that must match `expected` on its
// first `required` columns.
std::vector<std::vector<double>> parse_table(std::string_view text, const std::vector<std::string>& expected,
                                             std::size_t required)
{
    std::vector<std::vector<double>> rows;
    std::size_t line_no = 0;
    bool header_seen = false;
    std::size_t columns = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t end = text.find('\n', pos);
        std::string_view line = text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
        pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
        ++line_no;
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto fields = split(line, ',');
        if (!header_seen) {
            if (fields.size() < required || fields.size() > expected.size()) {
                throw Error("line 1: unexpected CSV header");
            }
            for (std::size_t k = 0; k < fields.size(); ++k) {
                if (trim(fields[k]) != expected[k]) {
                    throw Error("line 1: expected column '" + expected[k] + "'");
                }
            }
            columns = fields.size();
            header_seen = true;
            continue;
        }
        if (fields.size() != columns) {
            throw Error("line " + std::to_string(line_no) + ": expected " + std::to_string(columns) + " fields");
        }
        std::vector<double> row;
        row.reserve(columns);
        for (auto f : fields) {
            row.push_back(parse_number(f, line_no));
        }
        rows.push_back(std::move(row));
    }
    if (!header_seen) {
        throw Error("empty CSV");
    }
    return rows;
}

const char* kind_name(SpectrumKind k)
{
    switch (k) {
    case SpectrumKind::NormalMode: return "normal_mode";
    case SpectrumKind::Mmit: return "mmit";
    case SpectrumKind::Synthetic: return "synthetic";
    }
    return "synthetic";
}

SpectrumKind parse_kind(const std::string& s)
{
    if (s == "normal_mode") return SpectrumKind::NormalMode;
    if (s == "mmit") return SpectrumKind::Mmit;
    if (s == "synthetic") return SpectrumKind::Synthetic;
    throw Error("unknown spectrum kind '" + s + "'");
}

json complex_json(Complex z)
{
    return json::array({z.real(), z.imag()});
}

json covariance_json(const std::array<std::array<double, 2>, 2>& c)
{
    return json::array({json::array({c[0][0], c[0][1]}), json::array({c[1][0], c[1][1]})});
}
}  // namespace

std::string format_double(double x)
{
    char buf[32];
    const int n = std::snprintf(buf, sizeof buf, "%.17g", x);
    return std::string(buf, static_cast<std::size_t>(n));
}

std::string spectrum_csv(const Spectrum& s)
{
    std::string out = "freq_hz,re_s,im_s\n";
    out.reserve(out.size() + s.size() * 72);
    for (std::size_t k = 0; k < s.size(); ++k) {
        out += format_double(s.freq[k]);
        out += ',';
        out += format_double(s.response[k].real());
        out += ',';
        out += format_double(s.response[k].imag());
        out += '\n';
    }
    return out;
}

Spectrum parse_spectrum_csv(std::string_view text)
{
    const auto rows = parse_table(text, {"freq_hz", "re_s", "im_s"}, 3);
    Spectrum s;
    s.freq.reserve(rows.size());
    s.response.reserve(rows.size());
    for (const auto& r : rows) {
        s.freq.push_back(r[0]);
        s.response.emplace_back(r[1], r[2]);
    }
    return s;
}

json system_params_json(const SystemParams& p)
{
    return json{
        {"cavity_hz", linear(p.omega_a)},       {"magnon_hz", linear(p.omega_m)},
        {"kappa_hz", linear(p.kappa)},          {"kappa_ext_hz", linear(p.kappa_ext)},
        {"gamma_m_hz", linear(p.gamma_m)},      {"phonon_hz", linear(p.omega_b)},
        {"gamma_b_hz", linear(p.gamma_b)},      {"g_am_hz", linear(p.g_am)},
        {"g_mb0_hz", linear(p.g_mb0)},          {"alpha_hz", linear(p.alpha)},
        {"delta_kerr_hz", linear(p.delta_kerr)},
    };
}

json system_params_exact_json(const SystemParams& p)
{
    return json{
        {"omega_a", p.omega_a}, {"omega_m", p.omega_m}, {"kappa", p.kappa},     {"kappa_ext", p.kappa_ext},
        {"gamma_m", p.gamma_m}, {"omega_b", p.omega_b}, {"gamma_b", p.gamma_b}, {"g_am", p.g_am},
        {"g_mb0", p.g_mb0},     {"alpha", p.alpha},     {"delta_kerr", p.delta_kerr},
    };
}

SystemParams parse_system_params_exact(const json& j)
{
    SystemParams p;
    p.omega_a = j.at("omega_a").get<double>();
    p.omega_m = j.at("omega_m").get<double>();
    p.kappa = j.at("kappa").get<double>();
    p.kappa_ext = j.at("kappa_ext").get<double>();
    p.gamma_m = j.at("gamma_m").get<double>();
    p.omega_b = j.at("omega_b").get<double>();
    p.gamma_b = j.at("gamma_b").get<double>();
    p.g_am = j.at("g_am").get<double>();
    p.g_mb0 = j.at("g_mb0").get<double>();
    p.alpha = j.at("alpha").get<double>();
    p.delta_kerr = j.value("delta_kerr", 0.0);
    return p;
}

json spectrum_meta_json(const SpectrumMeta& meta)
{
    json j;
    j["kind"] = kind_name(meta.kind);
    j["frame"] = meta.frame == FrequencyFrame::Absolute ? "absolute" : "drive_offset";
    if (meta.params) {
        j["system_hz"] = system_params_json(*meta.params);
        j["system_rad_s"] = system_params_exact_json(*meta.params);
    }
    if (meta.drive) {
        j["drive"] = {{"omega_d_rad_s", meta.drive->omega_d},
                      {"drive_hz", linear(meta.drive->omega_d)},
                      {"power_w", meta.drive->power}};
    }
    if (meta.noise) {
        j["noise"] = {{"sigma", meta.noise->sigma}, {"seed", meta.noise->seed}};
    }
    return j;
}

SpectrumMeta parse_spectrum_meta(const json& j)
{
    SpectrumMeta meta;
    meta.kind = parse_kind(j.at("kind").get<std::string>());
    const auto frame = j.at("frame").get<std::string>();
    if (frame == "absolute") {
        meta.frame = FrequencyFrame::Absolute;
    } else if (frame == "drive_offset") {
        meta.frame = FrequencyFrame::DriveOffset;
    } else {
        throw Error("unknown frequency frame '" + frame + "'");
    }
    if (j.contains("system_rad_s")) {
        meta.params = parse_system_params_exact(j.at("system_rad_s"));
    }
    if (j.contains("drive")) {
        meta.drive = DriveConfig{j.at("drive").at("omega_d_rad_s").get<double>(),
                                 j.at("drive").at("power_w").get<double>()};
    }
    if (j.contains("noise")) {
        meta.noise = NoiseRecord{j.at("noise").at("sigma").get<double>(),
                                 j.at("noise").at("seed").get<std::uint64_t>()};
    }
    return meta;
}

std::pair<std::filesystem::path, std::filesystem::path> write_spectrum(const Spectrum& s,
                                                                       const std::filesystem::path& csv_path)
{
    auto sidecar = csv_path;
    sidecar.replace_extension(".json");
    write_file(csv_path, spectrum_csv(s));
    write_file(sidecar, spectrum_meta_json(s.meta).dump(2) + "\n");
    return {csv_path, sidecar};
}

Spectrum read_spectrum(const std::filesystem::path& csv_path)
{
    Spectrum s = parse_spectrum_csv(read_file(csv_path));
    auto sidecar = csv_path;
    sidecar.replace_extension(".json");
    if (std::filesystem::exists(sidecar)) {
        s.meta = parse_spectrum_meta(json::parse(read_file(sidecar)));
    }
    return s;
}

std::string dataset_csv(const std::vector<GammaPoint>& data)
{
    std::string out = "detuning_hz,power_w,gamma_hz,weight\n";
    for (const auto& pt : data) {
        out += format_double(pt.detuning_hz) + ',' + format_double(pt.power) + ',' + format_double(pt.gamma_hz)
               + ',' + format_double(pt.weight) + '\n';
    }
    return out;
}

std::vector<GammaPoint> parse_dataset_csv(std::string_view text)
{
    const auto rows = parse_table(text, {"detuning_hz", "power_w", "gamma_hz", "weight"}, 3);
    std::vector<GammaPoint> out;
    out.reserve(rows.size());
    for (const auto& r : rows) {
        out.push_back(GammaPoint{r[0], r[1], r[2], r.size() > 3 ? r[3] : 1.0});
    }
    return out;
}

std::vector<PowerPoint> parse_power_csv(std::string_view text)
{
    const auto rows = parse_table(text, {"power_w", "gamma_hz"}, 2);
    std::vector<PowerPoint> out;
    out.reserve(rows.size());
    for (const auto& r : rows) {
        out.push_back(PowerPoint{r[0], r[1]});
    }
    return out;
}

json to_json(const HybridModes& m)
{
    return json{
        {"omega_plus_hz", linear(m.omega_plus)},   {"omega_minus_hz", linear(m.omega_minus)},
        {"kappa_plus_hz", linear(m.kappa_plus)},   {"kappa_minus_hz", linear(m.kappa_minus)},
        {"theta_rad", m.theta},                    {"splitting_hz", linear(m.splitting)},
        {"magnon_fraction_plus", m.magnon_fraction_plus()},
    };
}

json to_json(const BackactionResult& r)
{
    return json{
        {"sigma_hz", complex_json(r.sigma / kTwoPi)},
        {"gamma_mag_exact_hz", linear(r.gamma_mag_exact)},
        {"gamma_plus_hz", linear(r.gamma_plus)},
        {"gamma_minus_hz", linear(r.gamma_minus)},
        {"gamma_mag_approx_hz", linear(r.gamma_mag_approx)},
        {"gamma_mag_corrected_hz", linear(r.gamma_mag_corrected)},
        {"spring_shift_hz", linear(r.spring_shift)},
        {"gamma_tot_hz", linear(r.gamma_tot)},
        {"magnon_population", r.magnon_population},
        {"weak_coupling", r.weak_coupling},
        {"unstable", r.unstable},
    };
}

json to_json(const EvasionRoot& r)
{
    return json{{"drive_hz", linear(r.omega_d)}, {"residual_hz", linear(r.residual)}, {"root_count", r.root_count}};
}

json to_json(const WindowFit& f)
{
    json bg = json::array();
    for (auto c : f.background) {
        bg.push_back(complex_json(c));
    }
    return json{
        {"center_hz", f.center},
        {"center_err_hz", f.center_err},
        {"fwhm_hz", f.fwhm},
        {"fwhm_err_hz", f.fwhm_err},
        {"amplitude", complex_json(f.amplitude)},
        {"amplitude_err", json::array({f.amplitude_re_err, f.amplitude_im_err})},
        {"background", bg},
        {"background_reference_hz", f.reference_hz},
        {"background_scale_hz", f.scale_hz},
        {"residual_rms", f.residual_rms},
        {"converged", f.converged},
        {"iterations", f.iterations},
        {"transparency", f.transparency()},
    };
}

json to_json(const PowerSeriesFit& f)
{
    return json{
        {"intercept_hz", f.intercept},
        {"intercept_err_hz", f.intercept_err()},
        {"slope_hz_per_w", f.slope},
        {"slope_err_hz_per_w", f.slope_err()},
        {"covariance", covariance_json(f.covariance)},
        {"residuals_hz", f.residuals},
    };
}

json to_json(const GlobalFit& f)
{
    return json{
        {"g_mb0_hz", f.g_mb0},
        {"g_mb0_err_hz", f.g_mb0_err()},
        {"alpha_hz", f.alpha},
        {"alpha_err_hz", f.alpha_err()},
        {"covariance", covariance_json(f.covariance)},
        {"chi_square", f.chi_square},
        {"dof", f.dof},
        {"residuals_hz", f.residuals},
    };
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content)
{
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) {
        throw Error("write failed for " + path.string());
    }
}

std::string sha256_hex(std::string_view bytes)
{
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1
        || EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1
        || EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1) {
        throw Error("sha256 failed");
    }
    std::ostringstream hex;
    hex << std::hex << std::setfill('0');
    for (unsigned int k = 0; k < len; ++k) {
        hex << std::setw(2) << static_cast<int>(digest[k]);
    }
    return hex.str();
}
}  // namespace magnomech::io
