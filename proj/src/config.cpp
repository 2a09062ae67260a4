#include "magnomech/config.hpp"

#include "magnomech/errors.hpp"
#include "magnomech/io.hpp"
#include "magnomech/spectra.hpp"
#include "magnomech/units.hpp"

#include <algorithm>
#include <set>

namespace magnomech
{
namespace
{
using io::json;

// Maps JSON paths back to source lines for error messages.
class Locator
{
public:
    Locator(std::string_view text, std::string source) : text_(text), source_(std::move(source)) {}

    [[noreturn]] void fail(const std::vector<std::string>& path, const std::string& message) const
    {
        std::string dotted;
        for (const auto& p : path) {
            dotted += dotted.empty() ? p : "." + p;
        }
        throw ConfigError(source_ + ":" + std::to_string(line_of(path)) + ": " + dotted + ": " + message);
    }

    const std::string& source() const { return source_; }

private:
    std::size_t line_of(const std::vector<std::string>& path) const
    {
        std::size_t pos = 0;
        for (const auto& key : path) {
            const auto found = text_.find("\"" + key + "\"", pos);
            if (found == std::string_view::npos) {
                break;
            }
            pos = found;
        }
        return 1 + static_cast<std::size_t>(std::count(text_.begin(), text_.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
    }

    std::string_view text_;
    std::string source_;
};

class Reader
{
public:
    Reader(const json& node, std::vector<std::string> path, const Locator& loc)
        : node_(node), path_(std::move(path)), loc_(loc)
    {
        if (!node_.is_object()) {
            loc_.fail(path_, "expected an object");
        }
    }

    void allow(std::initializer_list<const char*> keys) const
    {
        std::set<std::string> allowed(keys.begin(), keys.end());
        for (const auto& item : node_.items()) {
            if (!allowed.count(item.key())) {
                loc_.fail(child(item.key()), "unknown key");
            }
        }
    }

    bool has(const std::string& key) const { return node_.contains(key); }

    double number(const std::string& key) const
    {
        if (!node_.contains(key)) {
            loc_.fail(child(key), "missing required value");
        }
        return number_at(node_.at(key), child(key));
    }

    double number_or(const std::string& key, double fallback) const
    {
        return node_.contains(key) ? number(key) : fallback;
    }

    std::optional<double> optional_number(const std::string& key) const
    {
        if (!node_.contains(key)) {
            return std::nullopt;
        }
        return number(key);
    }

    std::string string(const std::string& key) const
    {
        if (!node_.contains(key) || !node_.at(key).is_string()) {
            loc_.fail(child(key), "expected a string");
        }
        return node_.at(key).get<std::string>();
    }

    bool boolean_or(const std::string& key, bool fallback) const
    {
        if (!node_.contains(key)) {
            return fallback;
        }
        if (!node_.at(key).is_boolean()) {
            loc_.fail(child(key), "expected true or false");
        }
        return node_.at(key).get<bool>();
    }

    std::uint64_t unsigned_integer(const std::string& key) const
    {
        const auto& v = node_.at(key);
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
            loc_.fail(child(key), "expected a non-negative integer");
        }
        return v.get<std::uint64_t>();
    }

    // Either an explicit array or {"start", "stop", "points"}.
    std::vector<double> grid(const std::string& key) const
    {
        const auto path = child(key);
        const json& v = node_.at(key);
        std::vector<double> out;
        if (v.is_array()) {
            for (const auto& x : v) {
                out.push_back(number_at(x, path));
            }
        } else if (v.is_object()) {
            Reader r(v, path, loc_);
            r.allow({"start", "stop", "points"});
            const double start = r.number("start");
            const double stop = r.number("stop");
            const auto points = r.unsigned_integer("points");
            if (points == 0) {
                loc_.fail(path, "grid needs at least one point");
            }
            out = linspace(start, stop, static_cast<std::size_t>(points));
        } else {
            loc_.fail(path, "expected an array or {start, stop, points}");
        }
        if (out.empty()) {
            loc_.fail(path, "grid is empty");
        }
        return out;
    }

    Reader object(const std::string& key) const { return Reader(node_.at(key), child(key), loc_); }

    std::vector<std::string> child(const std::string& key) const
    {
        auto p = path_;
        p.push_back(key);
        return p;
    }

    [[noreturn]] void fail(const std::string& key, const std::string& message) const { loc_.fail(child(key), message); }

private:
    double number_at(const json& v, const std::vector<std::string>& path) const
    {
        if (!v.is_number()) {
            loc_.fail(path, "expected a number");
        }
        const double x = v.get<double>();
        if (!std::isfinite(x)) {
            loc_.fail(path, "expected a finite number");
        }
        return x;
    }

    const json& node_;
    std::vector<std::string> path_;
    const Locator& loc_;
};

SystemParams parse_system(const Reader& r)
{
    r.allow({"cavity_hz", "magnon_hz", "splitting_hz", "magnon_side", "kappa_hz", "kappa_ext_hz", "gamma_m_hz",
             "phonon_hz", "gamma_b_hz", "g_am_hz", "g_mb0_hz", "alpha_hz", "delta_kerr_hz"});
    SystemParams p;
    p.omega_a = angular(r.number("cavity_hz"));
    p.kappa = angular(r.number("kappa_hz"));
    p.kappa_ext = angular(r.number("kappa_ext_hz"));
    p.gamma_m = angular(r.number("gamma_m_hz"));
    p.omega_b = angular(r.number("phonon_hz"));
    p.gamma_b = angular(r.number("gamma_b_hz"));
    p.g_am = angular(r.number("g_am_hz"));
    p.g_mb0 = angular(r.number_or("g_mb0_hz", 0.0));
    p.alpha = angular(r.number_or("alpha_hz", 0.0));
    p.delta_kerr = angular(r.number_or("delta_kerr_hz", 0.0));

    if (r.has("magnon_hz") == r.has("splitting_hz")) {
        r.fail("magnon_hz", "give exactly one of magnon_hz or splitting_hz");
    }
    if (r.has("magnon_hz")) {
        p.omega_m = angular(r.number("magnon_hz"));
    } else {
        int side = +1;
        if (r.has("magnon_side")) {
            const auto s = r.string("magnon_side");
            if (s == "above") {
                side = -1;
            } else if (s != "below") {
                r.fail("magnon_side", "expected \"below\" or \"above\"");
            }
        }
        const double split = angular(r.number("splitting_hz"));
        if (split < 2.0 * p.g_am) {
            r.fail("splitting_hz", "splitting is below the 2 g_am minimum");
        }
        p.omega_m = p.omega_a - detuning_for_splitting(p.g_am, split, side);
    }

    try {
        p.validate();
    } catch (const InvalidParameter& e) {
        r.fail("kappa_hz", e.what());
    }
    return p;
}
}  // namespace

RunConfig parse_config(std::string_view text, const std::string& source_name)
{
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        const std::size_t byte = std::min<std::size_t>(e.byte, text.size());
        const auto head = text.substr(0, byte > 0 ? byte - 1 : 0);
        const std::size_t line = 1 + static_cast<std::size_t>(std::count(head.begin(), head.end(), '\n'));
        const std::size_t last_nl = head.rfind('\n');
        const std::size_t col = last_nl == std::string_view::npos ? head.size() + 1 : head.size() - last_nl;
        throw ConfigError(source_name + ":" + std::to_string(line) + ":" + std::to_string(col)
                          + ": malformed JSON");
    }

    const Locator loc(text, source_name);
    const Reader root(doc, {}, loc);
    root.allow({"system", "drive", "sweep", "spectrum", "mmit", "window", "noise", "power_cutoff_w", "write_spectra",
                "output_dir", "fit", "threads"});

    RunConfig cfg;
    if (!root.has("system")) {
        root.fail("system", "missing required section");
    }
    cfg.system = parse_system(root.object("system"));

    if (root.has("drive")) {
        const Reader drive = root.object("drive");
        drive.allow({"detunings_hz", "powers_w"});
        if (drive.has("detunings_hz")) {
            cfg.detunings_hz = drive.grid("detunings_hz");
        }
        if (drive.has("powers_w")) {
            cfg.powers_w = drive.grid("powers_w");
            for (double p : cfg.powers_w) {
                if (p < 0.0) {
                    drive.fail("powers_w", "powers must be non-negative");
                }
            }
        }
    }
    if (root.has("sweep")) {
        const Reader sweep = root.object("sweep");
        sweep.allow({"power_w", "detuning_hz"});
        cfg.sweep_power_w = sweep.optional_number("power_w");
        cfg.sweep_detuning_hz = sweep.optional_number("detuning_hz");
        if (cfg.sweep_power_w && *cfg.sweep_power_w < 0.0) {
            sweep.fail("power_w", "power must be non-negative");
        }
    }
    auto read_grid_section = [&](const char* name, std::vector<double>& out) {
        if (!root.has(name)) {
            return;
        }
        const Reader section = root.object(name);
        section.allow({"grid"});
        out = section.grid("grid");
        try {
            check_grid(out);
        } catch (const GridError& e) {
            section.fail("grid", e.what());
        }
    };
    read_grid_section("spectrum", cfg.spectrum_grid_hz);
    read_grid_section("mmit", cfg.mmit_grid_hz);

    if (root.has("window")) {
        const Reader w = root.object("window");
        w.allow({"half_span_linewidths", "points", "background_order"});
        cfg.window.half_span_linewidths = w.number_or("half_span_linewidths", cfg.window.half_span_linewidths);
        if (w.has("points")) {
            cfg.window.points = static_cast<std::size_t>(w.unsigned_integer("points"));
        }
        if (w.has("background_order")) {
            cfg.window.background_order = static_cast<int>(w.unsigned_integer("background_order"));
        }
        if (!(cfg.window.half_span_linewidths > 0.0)) {
            w.fail("half_span_linewidths", "must be positive");
        }
        if (cfg.window.points < 16) {
            w.fail("points", "need at least 16 points per window");
        }
    }
    if (root.has("noise")) {
        const Reader n = root.object("noise");
        n.allow({"sigma", "relative", "seed"});
        cfg.noise.sigma = n.number_or("sigma", 0.0);
        cfg.noise.relative = n.boolean_or("relative", false);
        if (n.has("seed")) {
            cfg.noise.seed = n.unsigned_integer("seed");
        }
        if (cfg.noise.sigma < 0.0) {
            n.fail("sigma", "must be non-negative");
        }
    }
    cfg.power_cutoff_w = root.number_or("power_cutoff_w", cfg.power_cutoff_w);
    cfg.write_spectra = root.boolean_or("write_spectra", cfg.write_spectra);
    if (root.has("output_dir")) {
        cfg.output_dir = root.string("output_dir");
    }
    if (root.has("threads")) {
        cfg.threads = static_cast<unsigned>(root.unsigned_integer("threads"));
    }
    if (root.has("fit")) {
        const Reader f = root.object("fit");
        f.allow({"kind", "input", "init_center_hz", "background_order"});
        FitSpec spec;
        const auto kind = f.string("kind");
        if (kind == "window") {
            spec.kind = FitKind::Window;
        } else if (kind == "power_series") {
            spec.kind = FitKind::PowerSeries;
        } else if (kind == "global") {
            spec.kind = FitKind::Global;
        } else {
            f.fail("kind", "expected window, power_series or global");
        }
        spec.input = f.string("input");
        spec.init_center_hz = f.optional_number("init_center_hz");
        if (f.has("background_order")) {
            spec.background_order = static_cast<int>(f.unsigned_integer("background_order"));
        }
        cfg.fit = spec;
    }
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path)
{
    std::string text;
    try {
        text = io::read_file(path);
    } catch (const Error& e) {
        throw ConfigError(path.string() + ":0: " + e.what());
    }
    RunConfig cfg = parse_config(text, path.string());
    const auto base = path.parent_path();
    if (cfg.fit && cfg.fit->input.is_relative()) {
        cfg.fit->input = base / cfg.fit->input;
    }
    if (!cfg.output_dir.empty() && cfg.output_dir.is_relative()) {
        cfg.output_dir = base / cfg.output_dir;
    }
    return cfg;
}
}  // namespace magnomech
