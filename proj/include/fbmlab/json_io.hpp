// JSON and CSV serialisation of results, and atomic file replacement.
#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "fbmlab/asymptotics.hpp"
#include "fbmlab/constants.hpp"
#include "fbmlab/model.hpp"
#include "fbmlab/validation.hpp"

namespace fbmlab {

/// Embedded as "schema_version" in every top-level output document.
inline constexpr std::string_view kSchemaVersion = "1.0.0";

nlohmann::json to_json(const ModelParams& params);
nlohmann::json to_json(const ConstantEstimate& estimate);
nlohmann::json to_json(const AsymptoticResult& result);
nlohmann::json to_json(const McEstimate& estimate);
nlohmann::json to_json(const McTailResult& result);
nlohmann::json to_json(const ConvergenceTable& table);
nlohmann::json to_json(const LemmaCheckReport& report);

ConstantEstimate constant_from_json(const nlohmann::json& j);

/// Adds "schema_version" and "document" (the output type) to an object.
nlohmann::json envelope(std::string_view kind, nlohmann::json body);

/// Writes `contents` to a sibling temporary file and renames it over `file`.
/// Throws std::runtime_error on failure; `file` is left untouched then.
void write_file_atomically(const std::filesystem::path& file, const std::string& contents);

/// Decimal text with 17 significant digits.
std::string format_double(double value);

/// u, p_coarse, p_fine, ci_low, ci_high, extrapolated, asym, ratio, ratio_low, ratio_high
std::string convergence_csv(const ConvergenceTable& table);
/// ladder, delta, max_rel_error
std::string lemma_csv(const LemmaCheckReport& report);
/// Two whitespace-separated columns, one point per line, '#' header.
std::string plot_data(std::string_view x_label, std::string_view y_label,
                      const std::vector<double>& x, const std::vector<double>& y);
/// path, <functional>_n, <functional>_2n
std::string functional_samples_csv(const FunctionalSamples& samples, Functional functional);

}  // namespace fbmlab
