#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "dpht/evalharness.hpp"
#include "dpht/noise.hpp"
#include "dpht/pvalue.hpp"
#include "dpht/tables.hpp"
#include "dpht/testbed.hpp"

namespace dpht {

using Json = nlohmann::ordered_json;

/// Infinite values are written as the string "inf".
Json real_to_json(double v);
double real_from_json(const Json& j);

/// Exact schema: {"kind":"exact","rows":r,"cols":c,"counts":[[...],...]}.
Json to_json(const CountTable& t);
CountTable count_table_from_json(const Json& j);

/// Noisy schema: {"kind":"noisy","rows","cols","values","n0","provenance":{...}}.
Json to_json(const NoisyTable& nt);
NoisyTable noisy_table_from_json(const Json& j);

Json to_json(const Provenance& p);
Provenance provenance_from_json(const Json& j);

Json to_json(const TestResult& r);
Json to_json(const SensitivityReport& r);
Json to_json(const Margins& mg);
Json to_json(const QQSeries& s, bool include_points = false);
Json to_json(const AgreementRow& r);

/// True for documents in the noisy schema.
bool is_noisy_json(const Json& j);

/// A table file is either noisy JSON, exact JSON, or exact CSV.
struct LoadedTable {
  bool noisy = false;
  CountTable exact;
  NoisyTable privatized;
};

LoadedTable load_table_text(const std::string& text, const ParseOptions& csv_options = {});
LoadedTable load_table_file(const std::string& path, const ParseOptions& csv_options = {});

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace dpht
