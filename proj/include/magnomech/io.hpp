#pragma once

#include "magnomech/backaction.hpp"
#include "magnomech/core_model.hpp"
#include "magnomech/inference.hpp"
#include "magnomech/spectra.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace magnomech::io
{
using nlohmann::json;

// %.17g: strtod recovers the exact double.
std::string format_double(double x);

// CSV `freq_hz,re_s,im_s`, `\n` line endings.
std::string spectrum_csv(const Spectrum& s);
Spectrum parse_spectrum_csv(std::string_view text);

json spectrum_meta_json(const SpectrumMeta& meta);
SpectrumMeta parse_spectrum_meta(const json& j);

// Writes `<stem>.csv` and the `<stem>.json` sidecar; returns both paths.
std::pair<std::filesystem::path, std::filesystem::path> write_spectrum(const Spectrum& s,
                                                                       const std::filesystem::path& csv_path);
// Reads the CSV and, when present, its sidecar.
Spectrum read_spectrum(const std::filesystem::path& csv_path);

// Dataset CSV `detuning_hz,power_w,gamma_hz[,weight]`.
std::string dataset_csv(const std::vector<GammaPoint>& data);
std::vector<GammaPoint> parse_dataset_csv(std::string_view text);

// Power series CSV `power_w,gamma_hz`.
std::vector<PowerPoint> parse_power_csv(std::string_view text);

json system_params_json(const SystemParams& p);  // linear Hz
json system_params_exact_json(const SystemParams& p);  // rad/s, exact round trip
SystemParams parse_system_params_exact(const json& j);

json to_json(const HybridModes& m);
json to_json(const BackactionResult& r);
json to_json(const EvasionRoot& r);
json to_json(const WindowFit& f);
json to_json(const PowerSeriesFit& f);
json to_json(const GlobalFit& f);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

std::string sha256_hex(std::string_view bytes);
}  // namespace magnomech::io
