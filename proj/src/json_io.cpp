#include "fbmlab/json_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

#include <unistd.h>

namespace fbmlab {

using nlohmann::json;

namespace {

template <class T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

}  // namespace

json to_json(const ModelParams& p) {
  return {{"hurst", p.hurst}, {"drift", p.drift}, {"horizon", p.horizon}, {"sigma", p.sigma}};
}

json to_json(const ConstantEstimate& e) {
  return {{"kind", to_string(e.kind)},
          {"hurst", e.hurst},
          {"nu", optional_json(e.nu)},
          {"b", e.b},
          {"eta", e.eta},
          {"n_sim", e.n_sim},
          {"seed", e.seed},
          {"value", e.value},
          {"std_error", e.std_error},
          {"provenance", to_string(e.provenance)},
          {"note", e.note}};
}

ConstantEstimate constant_from_json(const json& j) {
  ConstantEstimate e;
  e.kind = parse_constant_kind(j.at("kind").get<std::string>());
  e.hurst = j.at("hurst").get<double>();
  if (j.contains("nu") && !j.at("nu").is_null()) e.nu = j.at("nu").get<double>();
  e.b = j.value("b", std::vector<double>{});
  e.eta = j.value("eta", 0.0);
  e.n_sim = j.value("n_sim", std::size_t{0});
  e.seed = j.value("seed", std::uint64_t{0});
  e.value = j.at("value").get<double>();
  e.std_error = j.value("std_error", 0.0);
  e.provenance = parse_provenance(j.value("provenance", std::string("simulated")));
  e.note = j.value("note", std::string());
  return e;
}

json to_json(const AsymptoticResult& r) {
  json thresholds = {{"m", optional_json(r.thresholds.m)},
                     {"m1", optional_json(r.thresholds.m1)},
                     {"m2", optional_json(r.thresholds.m2)},
                     {"s_star", optional_json(r.thresholds.s_star)},
                     {"s_u", optional_json(r.thresholds.s_u)}};
  json constants = json::object();
  constants["pickands"] =
      r.constants_used.pickands ? to_json(*r.constants_used.pickands) : json(nullptr);
  constants["piterbarg"] =
      r.constants_used.piterbarg ? to_json(*r.constants_used.piterbarg) : json(nullptr);
  return {{"functional", to_string(r.functional)},
          {"regime", to_string(r.regime)},
          {"u", r.u},
          {"params", to_json(r.params)},
          {"threshold_value", r.threshold_value},
          {"prefactor", r.prefactor},
          {"power_exponent", r.power_exponent},
          {"probability", r.probability},
          {"log_probability", r.log_probability},
          {"thresholds", thresholds},
          {"constants_used", constants},
          {"variant", r.variant ? json(to_string(*r.variant)) : json(nullptr)},
          {"variant_note", optional_json(r.variant_note)}};
}

json to_json(const McEstimate& e) {
  return {{"p_hat", e.p_hat},
          {"ci_low", e.ci_low},
          {"ci_high", e.ci_high},
          {"hits", e.hits},
          {"n_paths", e.n_paths},
          {"n_steps", e.n_steps},
          {"extrapolated", optional_json(e.extrapolated)}};
}

json to_json(const McTailResult& r) {
  return {{"functional", to_string(r.query.functional)},
          {"u", r.query.u},
          {"params", to_json(r.query.params)},
          {"coarse", to_json(r.coarse)},
          {"fine", to_json(r.fine)},
          {"extrapolated", r.extrapolated},
          {"bias_note", r.bias_note}};
}

json to_json(const ConvergenceTable& t) {
  json rows = json::array();
  for (const ConvergenceRow& row : t.rows) {
    rows.push_back({{"u", row.u},
                    {"mc", to_json(row.mc)},
                    {"asym", to_json(row.asym)},
                    {"ratio", row.ratio},
                    {"ratio_low", row.ratio_low},
                    {"ratio_high", row.ratio_high},
                    {"ratio_se", row.ratio_se}});
  }
  json trend = nullptr;
  if (t.trend) {
    trend = {{"steps", t.trend->steps},
             {"steps_toward_one", t.trend->steps_toward_one},
             {"steps_nondecreasing", t.trend->steps_nondecreasing},
             {"monotone_toward_one", t.trend->monotone_toward_one}};
  }
  return {{"functional", to_string(t.functional)},
          {"params", to_json(t.params)},
          {"variant", t.variant ? json(to_string(*t.variant)) : json(nullptr)},
          {"rows", rows},
          {"trend", trend}};
}

json to_json(const LemmaCheckReport& r) {
  return {{"lemma", to_string(r.lemma)},
          {"params", to_json(r.params)},
          {"ladder_kind", r.ladder_kind},
          {"u_grid", r.u_grid},
          {"deltas", r.deltas},
          {"max_rel_error", r.max_rel_error},
          {"s_u", optional_json(r.s_u)},
          {"strictly_decreasing", r.strictly_decreasing},
          {"halving", r.halving},
          {"pass", r.pass}};
}

json envelope(std::string_view kind, json body) {
  json out = {{"schema_version", kSchemaVersion}, {"document", kind}};
  out.update(body);
  return out;
}

void write_file_atomically(const std::filesystem::path& file, const std::string& contents) {
  const std::filesystem::path tmp =
      file.string() + ".tmp." + std::to_string(static_cast<long long>(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << contents;
    out.flush();
    if (!out) {
      out.close();
      std::error_code ignored;
      std::filesystem::remove(tmp, ignored);
      throw std::runtime_error("write to " + tmp.string() + " failed");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, file, ec);
  if (ec) {
    std::error_code ignored;
    std::filesystem::remove(tmp, ignored);
    throw std::runtime_error("cannot replace " + file.string() + ": " + ec.message());
  }
}

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string convergence_csv(const ConvergenceTable& t) {
  std::ostringstream os;
  os << "u,p_coarse,p_fine,ci_low,ci_high,extrapolated,asym,ratio,ratio_low,ratio_high\n";
  for (const ConvergenceRow& r : t.rows) {
    os << format_double(r.u) << ',' << format_double(r.mc.coarse.p_hat) << ','
       << format_double(r.mc.fine.p_hat) << ',' << format_double(r.mc.fine.ci_low) << ','
       << format_double(r.mc.fine.ci_high) << ',' << format_double(r.mc.extrapolated) << ','
       << format_double(r.asym.probability) << ',' << format_double(r.ratio) << ','
       << format_double(r.ratio_low) << ',' << format_double(r.ratio_high) << '\n';
  }
  return os.str();
}

std::string lemma_csv(const LemmaCheckReport& r) {
  std::ostringstream os;
  os << (r.ladder_kind == "u" ? "u" : "delta") << ",delta,max_rel_error\n";
  for (std::size_t k = 0; k < r.max_rel_error.size(); ++k) {
    const double x = r.ladder_kind == "u" ? r.u_grid[k] : r.deltas[k];
    os << format_double(x) << ',' << format_double(r.deltas[k]) << ','
       << format_double(r.max_rel_error[k]) << '\n';
  }
  return os.str();
}

std::string plot_data(std::string_view x_label, std::string_view y_label,
                      const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("plot columns differ in length");
  std::ostringstream os;
  os << "# " << x_label << ' ' << y_label << '\n';
  for (std::size_t k = 0; k < x.size(); ++k) {
    os << format_double(x[k]) << ' ' << format_double(y[k]) << '\n';
  }
  return os.str();
}

std::string functional_samples_csv(const FunctionalSamples& s, Functional f) {
  std::ostringstream os;
  const std::string name(to_string(f));
  os << "path," << name << "_n," << name << "_2n\n";
  const auto& coarse = s.coarse(f);
  const auto& fine = s.fine(f);
  for (std::size_t i = 0; i < s.n_paths; ++i) {
    os << i << ',' << format_double(coarse[i]) << ',' << format_double(fine[i]) << '\n';
  }
  return os.str();
}

}  // namespace fbmlab
