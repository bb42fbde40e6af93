#include "dpht/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "dpht/error.hpp"

namespace dpht {

namespace {

std::string mode_string(PrivacyMode mode) { return mode == PrivacyMode::Standard ? "standard" : "marginal_neighbor"; }

PrivacyMode parse_privacy_mode(const std::string& s) {
  if (s == "standard") return PrivacyMode::Standard;
  if (s == "marginal_neighbor") return PrivacyMode::MarginalNeighbor;
  throw Error(ErrorCode::InvalidArgument, "unknown privacy mode '" + s + "'");
}

NoiseFamily parse_family(const std::string& s) {
  if (s == "laplace") return NoiseFamily::Laplace;
  if (s == "gaussian") return NoiseFamily::Gaussian;
  if (s == "custom") return NoiseFamily::Custom;
  throw Error(ErrorCode::InvalidArgument, "unknown noise family '" + s + "'");
}

template <typename T>
T field(const Json& j, const char* key) {
  if (!j.contains(key)) throw Error(ErrorCode::InvalidArgument, std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("bad field '") + key + "': " + e.what());
  }
}

}  // namespace

Json real_to_json(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return nullptr;
  return v;
}

double real_from_json(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "Infinity") return kInfinity;
    if (s == "-inf" || s == "-Infinity") return -kInfinity;
  }
  if (j.is_null()) return std::nan("");
  throw Error(ErrorCode::InvalidArgument, "expected a number or \"inf\"");
}

Json to_json(const CountTable& t) {
  Json counts = Json::array();
  for (std::size_t i = 0; i < t.rows(); ++i) {
    Json row = Json::array();
    for (std::size_t j = 0; j < t.cols(); ++j) row.push_back(t.at(i, j));
    counts.push_back(std::move(row));
  }
  return Json{{"kind", "exact"}, {"rows", t.rows()}, {"cols", t.cols()}, {"counts", std::move(counts)}};
}

CountTable count_table_from_json(const Json& j) {
  if (!j.contains("counts")) throw Error(ErrorCode::InvalidArgument, "exact table JSON needs 'counts'");
  const Json& counts = j.at("counts");
  if (!counts.is_array() || counts.empty()) throw Error(ErrorCode::EmptyInput, "'counts' is empty");
  std::vector<std::vector<std::int64_t>> rows;
  for (const auto& row : counts) {
    if (!row.is_array()) throw Error(ErrorCode::NonRectangular, "'counts' rows must be arrays");
    std::vector<std::int64_t> out;
    for (const auto& v : row) {
      if (v.is_number_integer()) {
        out.push_back(v.get<std::int64_t>());
      } else if (v.is_number() && v.get<double>() == std::floor(v.get<double>())) {
        out.push_back(static_cast<std::int64_t>(v.get<double>()));
      } else {
        throw Error(ErrorCode::NonIntegerCount, "exact counts must be integers");
      }
      if (out.back() < 0) throw Error(ErrorCode::NegativeCount, "exact counts must be >= 0");
    }
    rows.push_back(std::move(out));
  }
  CountTable t = CountTable::from_rows(rows);
  if (j.contains("rows") && field<std::size_t>(j, "rows") != t.rows()) {
    throw Error(ErrorCode::NonRectangular, "'rows' does not match 'counts'");
  }
  if (j.contains("cols") && field<std::size_t>(j, "cols") != t.cols()) {
    throw Error(ErrorCode::NonRectangular, "'cols' does not match 'counts'");
  }
  return t;
}

Json to_json(const Provenance& p) {
  return Json{{"family", family_name(p.noise.family)},
              {"scale", p.noise.scale},
              {"epsilon", real_to_json(p.noise.epsilon)},
              {"sensitivity", real_to_json(p.noise.sensitivity)},
              {"pure_dp", p.noise.pure_dp},
              {"seed", p.seed},
              {"mode", mode_string(p.mode)}};
}

Provenance provenance_from_json(const Json& j) {
  Provenance p;
  p.noise.family = parse_family(field<std::string>(j, "family"));
  if (p.noise.family == NoiseFamily::Custom) {
    throw Error(ErrorCode::InvalidArgument, "custom noise cannot be reconstructed from a file");
  }
  p.noise.scale = field<double>(j, "scale");
  if (!(p.noise.scale >= 0.0) || !std::isfinite(p.noise.scale)) {
    throw Error(ErrorCode::InvalidArgument, "noise scale must be finite and >= 0");
  }
  p.noise.epsilon = j.contains("epsilon") ? real_from_json(j.at("epsilon")) : kInfinity;
  p.noise.sensitivity = j.contains("sensitivity") ? real_from_json(j.at("sensitivity")) : kTableSensitivity;
  p.noise.pure_dp = j.contains("pure_dp") ? field<bool>(j, "pure_dp") : p.noise.family == NoiseFamily::Laplace;
  p.seed = j.contains("seed") ? field<std::uint64_t>(j, "seed") : 0;
  p.mode = j.contains("mode") ? parse_privacy_mode(field<std::string>(j, "mode")) : PrivacyMode::Standard;
  return p;
}

Json to_json(const NoisyTable& nt) {
  Json values = Json::array();
  for (std::size_t i = 0; i < nt.rows(); ++i) {
    Json row = Json::array();
    for (std::size_t j = 0; j < nt.cols(); ++j) row.push_back(nt.table.at(i, j));
    values.push_back(std::move(row));
  }
  return Json{{"kind", "noisy"},
              {"rows", nt.rows()},
              {"cols", nt.cols()},
              {"values", std::move(values)},
              {"n0", nt.n0_declared},
              {"provenance", to_json(nt.provenance)}};
}

NoisyTable noisy_table_from_json(const Json& j) {
  if (!j.contains("values")) throw Error(ErrorCode::InvalidArgument, "noisy table JSON needs 'values'");
  const Json& values = j.at("values");
  if (!values.is_array() || values.empty()) throw Error(ErrorCode::EmptyInput, "'values' is empty");
  NoisyTable nt;
  nt.table.rows = values.size();
  for (const auto& row : values) {
    if (!row.is_array() || row.empty()) throw Error(ErrorCode::NonRectangular, "'values' rows must be arrays");
    if (nt.table.cols == 0) nt.table.cols = row.size();
    if (row.size() != nt.table.cols) throw Error(ErrorCode::NonRectangular, "'values' rows differ in length");
    for (const auto& v : row) {
      if (!v.is_number()) throw Error(ErrorCode::InvalidArgument, "noisy values must be numbers");
      nt.table.values.push_back(v.get<double>());
    }
  }
  nt.n0_declared = field<std::int64_t>(j, "n0");
  if (nt.n0_declared < 0) throw Error(ErrorCode::NegativeCount, "n0 must be >= 0");
  nt.provenance = j.contains("provenance") ? provenance_from_json(j.at("provenance")) : Provenance{};
  return nt;
}

Json to_json(const TestResult& r) {
  Json flags = Json::array();
  for (const auto& f : r.flags) flags.push_back(f);
  Json inputs = Json::array();
  for (const auto& p : r.inputs) inputs.push_back(to_json(p));
  return Json{{"test", test_name(r.test)},
              {"statistic", statistic_name(r.statistic)},
              {"t_star", real_to_json(r.t_star)},
              {"m", r.m},
              {"exceed", r.exceed},
              {"p", r.p_value},
              {"flags", std::move(flags)},
              {"seed", r.seed},
              {"inputs", std::move(inputs)}};
}

Json to_json(const Margins& mg) {
  return Json{{"row_sums", mg.row_sums}, {"col_sums", mg.col_sums}, {"n", mg.total}};
}

Json to_json(const SensitivityReport& r) {
  Json j{{"statistic", statistic_name(r.statistic)},
         {"margins", to_json(r.margins)},
         {"s_h", r.s_h},
         {"branch", r.branch}};
  j["brute_force"] = r.brute_force ? Json(*r.brute_force) : Json(nullptr);
  j["flags"] = r.flags;
  return j;
}

Json to_json(const QQSeries& s, bool include_points) {
  Json j{{"epsilon", real_to_json(s.epsilon)},
         {"method", method_name(s.method)},
         {"trials", s.points.size()},
         {"skipped", s.skipped},
         {"ks", s.ks},
         {"rejection_rate_05", s.rejection_rate_05}};
  if (include_points) {
    Json pts = Json::array();
    for (const auto& p : s.points) pts.push_back(Json{{"trial", p.trial}, {"p_value", p.p_value}});
    j["points"] = std::move(pts);
  }
  return j;
}

Json to_json(const AgreementRow& r) {
  return Json{{"epsilon", real_to_json(r.epsilon)},
              {"statistic", statistic_name(r.statistic)},
              {"mean_p", real_to_json(r.mean_p)},
              {"p10", real_to_json(r.p10)},
              {"p90", real_to_json(r.p90)},
              {"nonprivate_p", r.nonprivate_p},
              {"repeats_used", r.repeats_used},
              {"skipped", r.skipped}};
}

bool is_noisy_json(const Json& j) {
  if (j.contains("kind") && j.at("kind").is_string()) return j.at("kind").get<std::string>() == "noisy";
  return j.contains("values");
}

LoadedTable load_table_text(const std::string& text, const ParseOptions& csv_options) {
  LoadedTable out;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) throw Error(ErrorCode::EmptyInput, "table input is empty");
  if (text[first] == '{') {
    Json j;
    try {
      j = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::InvalidArgument, std::string("invalid JSON: ") + e.what());
    }
    if (is_noisy_json(j)) {
      out.noisy = true;
      out.privatized = noisy_table_from_json(j);
    } else {
      out.exact = count_table_from_json(j);
    }
    return out;
  }
  out.exact = parse_table(text, csv_options);
  return out;
}

LoadedTable load_table_file(const std::string& path, const ParseOptions& csv_options) {
  return load_table_text(read_file(path), csv_options);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write '" + path + "'");
  out << content;
}

}  // namespace dpht
