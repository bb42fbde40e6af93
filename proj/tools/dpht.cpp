// dpht: privatize contingency tables and run private hypothesis tests.

#include <CLI11.hpp>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dpht/error.hpp"
#include "dpht/evalharness.hpp"
#include "dpht/io.hpp"
#include "dpht/pvalue.hpp"
#include "dpht/testbed.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;
constexpr int kExitInfeasible = 5;

/// Bad flag values detected after CLI11 parsing; mapped to exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GlobalOptions {
  std::optional<std::string> seed;
  std::string format = "json";
  std::string out;
  unsigned threads = 1;
  bool header_row = false;
  bool header_col = false;
};

std::uint64_t parse_seed(const std::string& text, const char* source) {
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(text, &pos, 0);
    if (pos != text.size()) throw std::invalid_argument(text);
    return static_cast<std::uint64_t>(v);
  } catch (const std::exception&) {
    throw UsageError(std::string("invalid seed from ") + source + ": '" + text + "'");
  }
}

std::uint64_t resolve_seed(const GlobalOptions& g) {
  if (g.seed) return parse_seed(*g.seed, "--seed");
  if (const char* env = std::getenv("DPHT_SEED"); env && *env) return parse_seed(env, "DPHT_SEED");
  std::random_device rd;
  const std::uint64_t seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  std::cerr << "dpht: no seed given; using seed " << seed << "\n";
  return seed;
}

double parse_epsilon(const std::string& text) {
  if (text == "inf" || text == "Inf" || text == "infinity") return dpht::kInfinity;
  double v = 0.0;
  try {
    std::size_t pos = 0;
    v = std::stod(text, &pos);
    if (pos != text.size()) throw std::invalid_argument(text);
  } catch (const std::exception&) {
    throw UsageError("invalid epsilon '" + text + "'");
  }
  if (!(v > 0.0) || std::isnan(v)) throw UsageError("epsilon must be > 0 (or 'inf'), got '" + text + "'");
  return v;
}

std::vector<double> parse_epsilons(const std::vector<std::string>& items) {
  std::vector<double> out;
  for (const auto& item : items) {
    std::stringstream ss(item);
    std::string part;
    while (std::getline(ss, part, ',')) {
      if (!part.empty()) out.push_back(parse_epsilon(part));
    }
  }
  if (out.empty()) throw UsageError("at least one epsilon is required");
  return out;
}

std::vector<double> parse_probs(const std::string& text, const char* flag) {
  try {
    return dpht::parse_real_list(text);
  } catch (const dpht::Error& e) {
    throw UsageError(std::string(flag) + ": " + e.what());
  }
}

dpht::ParseOptions csv_options(const GlobalOptions& g) { return dpht::ParseOptions{g.header_row, g.header_col}; }

dpht::LoadedTable load_input(const std::string& input, const GlobalOptions& g) {
  if (input.rfind("fixture:", 0) == 0) {
    dpht::LoadedTable t;
    t.exact = dpht::builtin_fixture(input.substr(8));
    return t;
  }
  if (input == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return dpht::load_table_text(ss.str(), csv_options(g));
  }
  return dpht::load_table_file(input, csv_options(g));
}

void emit(const GlobalOptions& g, const std::string& content) {
  if (g.out.empty() || g.out == "-") {
    std::cout << content;
    if (!content.empty() && content.back() != '\n') std::cout << '\n';
  } else {
    dpht::write_file(g.out, content);
  }
}

void echo_config(const dpht::Json& cfg) { std::cerr << "dpht config: " << cfg.dump() << "\n"; }

/// Echo with the thread count, which is kept out of embedded configs so that
/// stdout does not depend on it.
void echo_config(dpht::Json cfg, unsigned threads) {
  cfg["threads"] = threads;
  echo_config(cfg);
}

std::string csv_real(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string noisy_csv(const dpht::NoisyTable& nt) {
  std::ostringstream os;
  for (std::size_t i = 0; i < nt.rows(); ++i) {
    for (std::size_t j = 0; j < nt.cols(); ++j) os << (j ? "," : "") << csv_real(nt.table.at(i, j));
    os << '\n';
  }
  return os.str();
}

std::string result_csv(const dpht::TestResult& r) {
  std::ostringstream os;
  os << "test,statistic,t_star,m,exceed,p,flags,seed\n";
  std::string flags;
  for (const auto& f : r.flags) flags += (flags.empty() ? "" : ";") + f;
  os << dpht::test_name(r.test) << ',' << dpht::statistic_name(r.statistic) << ',' << csv_real(r.t_star) << ',' << r.m
     << ',' << r.exceed << ',' << csv_real(r.p_value) << ',' << flags << ',' << r.seed << '\n';
  return os.str();
}

// ---- privatize -------------------------------------------------------------

struct PrivatizeOptions {
  std::string input;
  std::string epsilon;
  double sensitivity = dpht::kTableSensitivity;
  std::string noise = "laplace";
  std::optional<double> scale;
};

int run_privatize(const PrivatizeOptions& o, const GlobalOptions& g) {
  const double eps = parse_epsilon(o.epsilon);
  if (!(o.sensitivity > 0.0)) throw UsageError("--sensitivity must be > 0");
  const std::uint64_t seed = resolve_seed(g);
  dpht::NoiseSpec spec;
  if (o.noise == "laplace") {
    if (o.scale) throw UsageError("--scale only applies to gaussian noise");
    spec = dpht::NoiseSpec::laplace(eps, o.sensitivity);
  } else {
    // Same variance as Laplace(S/eps) unless overridden.
    const double sigma = o.scale ? *o.scale : (std::isinf(eps) ? 0.0 : std::sqrt(2.0) * o.sensitivity / eps);
    if (!(sigma >= 0.0)) throw UsageError("--scale must be >= 0");
    spec = dpht::NoiseSpec::gaussian(sigma, eps, o.sensitivity);
  }
  echo_config({{"command", "privatize"},
               {"input", o.input},
               {"epsilon", dpht::real_to_json(eps)},
               {"sensitivity", o.sensitivity},
               {"noise", o.noise},
               {"scale", spec.scale},
               {"seed", seed}});
  const auto loaded = load_input(o.input, g);
  if (loaded.noisy) throw UsageError("input is already a noisy table");
  const dpht::NoisyTable nt = dpht::perturb_table(loaded.exact, spec, seed);
  emit(g, g.format == "csv" ? noisy_csv(nt) : dpht::to_json(nt).dump(2));
  return kExitOk;
}

// ---- test ------------------------------------------------------------------

struct TestOptions {
  std::string kind;
  std::vector<std::string> inputs;
  std::string stat = "chi2";
  std::size_t m = dpht::kDefaultReferenceCount;
  std::string theta;
  std::optional<std::string> epsilon;
  bool smoothing = false;
  std::string gof_method = "exact";
};

int run_test_cmd(const TestOptions& o, const GlobalOptions& g) {
  const dpht::TestKind kind = dpht::parse_test(o.kind);
  const dpht::StatisticKind stat = dpht::parse_statistic(o.stat);
  if (stat == dpht::StatisticKind::LL || stat == dpht::StatisticKind::Diff) {
    throw UsageError("--stat " + o.stat + " is only available through 'testbed'");
  }
  if (kind == dpht::TestKind::GoodnessOfFit && o.theta.empty()) throw UsageError("gof requires --theta");
  if (kind != dpht::TestKind::GoodnessOfFit && !o.theta.empty()) throw UsageError("--theta only applies to gof");
  const std::size_t want = kind == dpht::TestKind::Proportions ? 2 : 1;
  if (o.inputs.size() != want) {
    throw UsageError(o.kind + " takes " + std::to_string(want) + " input table(s)");
  }
  if (o.m < 1) throw UsageError("--m must be >= 1");
  std::optional<double> eps;
  if (o.epsilon) {
    eps = parse_epsilon(*o.epsilon);
    if (!std::isinf(*eps)) {
      throw UsageError("test --epsilon accepts only 'inf'; privatize the table first with 'dpht privatize'");
    }
  }
  if (o.gof_method != "exact" && o.gof_method != "gaussian") throw UsageError("--gof-method must be exact|gaussian");
  const std::uint64_t seed = resolve_seed(g);

  dpht::TestRequest req;
  req.test = kind;
  req.statistic = stat;
  req.m = o.m;
  req.seed = seed;
  req.threads = g.threads;
  req.smoothing = o.smoothing;
  req.gof_method = o.gof_method == "exact" ? dpht::GofMethod::ExactMultinomial : dpht::GofMethod::GaussianLimit;
  if (!o.theta.empty()) req.theta0 = dpht::Theta::vector(parse_probs(o.theta, "--theta"));
  for (const auto& input : o.inputs) {
    const auto loaded = load_input(input, g);
    if (loaded.noisy) {
      req.tables.push_back(loaded.privatized);
    } else {
      if (!eps) {
        throw UsageError("'" + input +
                         "' is an exact table; privatize it first or pass --epsilon inf to test exact data");
      }
      req.tables.push_back(dpht::perturb_table(loaded.exact, dpht::NoiseSpec::identity(), 0));
    }
  }
  dpht::Json inputs = dpht::Json::array();
  for (const auto& i : o.inputs) inputs.push_back(i);
  echo_config({{"command", "test"},
               {"test", o.kind},
               {"statistic", o.stat},
               {"inputs", inputs},
               {"m", o.m},
               {"smoothing", o.smoothing},
               {"gof_method", o.gof_method},
               {"threads", g.threads},
               {"seed", seed}});
  const dpht::TestResult r = dpht::run_test(req);
  emit(g, g.format == "csv" ? result_csv(r) : dpht::to_json(r).dump(2));
  return kExitOk;
}

// ---- reliability -----------------------------------------------------------

struct ReliabilityOptions {
  std::string test = "independence";
  std::string stat = "chi2";
  std::int64_t n0 = 1000;
  std::int64_t n1 = 1000;
  std::int64_t n2 = 1000;
  std::string p_row = "0.5,0.5";
  std::string p_col = "0.5,0.5";
  std::string theta;
  std::vector<std::string> epsilons = {"0.2"};
  std::size_t trials = dpht::kDefaultTrials;
  std::size_t m = 1000;
  std::string method = "ours";
  double sensitivity = dpht::kTableSensitivity;
  std::size_t thin = 0;
  std::string summary;
};

int run_reliability(const ReliabilityOptions& o, const GlobalOptions& g) {
  dpht::ReliabilityConfig cfg;
  cfg.test = dpht::parse_test(o.test);
  cfg.statistic = dpht::parse_statistic(o.stat);
  cfg.n0 = o.n0;
  cfg.n1 = o.n1;
  cfg.n2 = o.n2;
  cfg.p_row = parse_probs(o.p_row, "--p-row");
  cfg.p_col = parse_probs(o.p_col, "--p-col");
  if (cfg.test != dpht::TestKind::Independence) {
    if (o.theta.empty()) throw UsageError(o.test + " reliability requires --theta");
    cfg.theta = parse_probs(o.theta, "--theta");
  }
  cfg.epsilons = parse_epsilons(o.epsilons);
  cfg.trials = o.trials;
  cfg.m = o.m;
  cfg.method = dpht::parse_method(o.method);
  cfg.sensitivity = o.sensitivity;
  cfg.threads = g.threads;
  cfg.thin = o.thin;
  cfg.seed = resolve_seed(g);

  dpht::Json eps = dpht::Json::array();
  for (double e : cfg.epsilons) eps.push_back(dpht::real_to_json(e));
  const dpht::Json config{{"command", "reliability"}, {"test", o.test},     {"statistic", o.stat},
                          {"n0", o.n0},               {"n1", o.n1},         {"n2", o.n2},
                          {"p_row", cfg.p_row},       {"p_col", cfg.p_col}, {"theta", cfg.theta},
                          {"epsilons", eps},          {"trials", o.trials}, {"m", o.m},
                          {"method", o.method},       {"thin", o.thin},     {"seed", cfg.seed}};
  echo_config(config, g.threads);
  const auto series = dpht::reliability_experiment(cfg);

  dpht::Json summary{{"config", config}, {"series", dpht::Json::array()}};
  for (const auto& s : series) summary["series"].push_back(dpht::to_json(s));
  if (!o.summary.empty()) dpht::write_file(o.summary, summary.dump(2));
  if (g.format == "json") {
    emit(g, summary.dump(2));
  } else {
    std::ostringstream os;
    dpht::write_qq_csv(os, series, cfg.thin);
    emit(g, os.str());
  }
  for (const auto& s : series) {
    std::cerr << "epsilon=" << csv_real(s.epsilon) << " method=" << dpht::method_name(s.method) << " ks=" << s.ks
              << " P(p<=0.05)=" << s.rejection_rate_05 << " skipped=" << s.skipped << "\n";
  }
  return kExitOk;
}

// ---- testbed ---------------------------------------------------------------

struct TestbedOptions {
  std::string input;
  std::string stat = "chi2";
  std::string mode = "input";
  std::string epsilon;
  std::size_t m = dpht::kDefaultReferenceCount;
};

int run_testbed(const TestbedOptions& o, const GlobalOptions& g) {
  dpht::TestbedRequest req;
  req.statistic = dpht::parse_statistic(o.stat);
  req.mode = dpht::parse_mode(o.mode);
  req.epsilon = parse_epsilon(o.epsilon);
  if (o.m < 1) throw UsageError("--m must be >= 1");
  req.m = o.m;
  req.threads = g.threads;
  req.seed = resolve_seed(g);
  echo_config({{"command", "testbed"},
               {"input", o.input},
               {"statistic", o.stat},
               {"mode", o.mode},
               {"epsilon", dpht::real_to_json(req.epsilon)},
               {"m", o.m},
               {"threads", g.threads},
               {"seed", req.seed}});
  const auto loaded = load_input(o.input, g);
  if (loaded.noisy) throw UsageError("testbed needs an exact table; it applies its own noise");
  const dpht::TestResult r = dpht::testbed_pvalue(loaded.exact, req);
  emit(g, g.format == "csv" ? result_csv(r) : dpht::to_json(r).dump(2));
  return kExitOk;
}

// ---- sensitivity -----------------------------------------------------------

struct SensitivityOptions {
  std::string stat = "chi2";
  std::string margins;
  std::string input;
  bool brute_force = false;
};

int run_sensitivity(const SensitivityOptions& o, const GlobalOptions& g) {
  const dpht::StatisticKind stat = dpht::parse_statistic(o.stat);
  if (o.margins.empty() == o.input.empty()) throw UsageError("give exactly one of --margins or an input table");
  dpht::Margins mg;
  if (!o.margins.empty()) {
    mg = dpht::parse_margins(o.margins);
  } else {
    const auto loaded = load_input(o.input, g);
    if (loaded.noisy) throw UsageError("sensitivity needs exact margins");
    mg = dpht::margins(loaded.exact);
  }
  echo_config({{"command", "sensitivity"},
               {"statistic", o.stat},
               {"margins", dpht::to_json(mg)},
               {"brute_force", o.brute_force}});
  const dpht::SensitivityReport rep = dpht::sensitivity(stat, mg, o.brute_force);
  if (rep.has_flag("brute_force_fallback")) {
    std::cerr << "dpht: no closed form for this shape; s_h computed by brute force\n";
  }
  if (g.format == "csv") {
    std::ostringstream os;
    os << "statistic,s_h,branch,brute_force\n"
       << dpht::statistic_name(rep.statistic) << ',' << csv_real(rep.s_h) << ",\"" << rep.branch << "\","
       << (rep.brute_force ? csv_real(*rep.brute_force) : "") << '\n';
    emit(g, os.str());
  } else {
    emit(g, dpht::to_json(rep).dump(2));
  }
  return kExitOk;
}

// ---- agreement -------------------------------------------------------------

struct AgreementOptions {
  std::string test = "independence";
  std::vector<std::string> inputs;
  std::vector<std::string> stats = {"chi2", "lr"};
  std::vector<std::string> epsilons;
  std::string theta;
  std::size_t repeats = 100;
  std::size_t m = dpht::kDefaultReferenceCount;
  double sensitivity = dpht::kTableSensitivity;
};

int run_agreement(const AgreementOptions& o, const GlobalOptions& g) {
  dpht::AgreementConfig cfg;
  cfg.test = dpht::parse_test(o.test);
  cfg.statistics.clear();
  for (const auto& s : o.stats) {
    const auto k = dpht::parse_statistic(s);
    if (k == dpht::StatisticKind::LL || k == dpht::StatisticKind::Diff) {
      throw UsageError("--stat " + s + " is only available through 'testbed'");
    }
    cfg.statistics.push_back(k);
  }
  cfg.epsilons = parse_epsilons(o.epsilons);
  cfg.repeats = o.repeats;
  cfg.m = o.m;
  cfg.sensitivity = o.sensitivity;
  cfg.threads = g.threads;
  if (cfg.test == dpht::TestKind::GoodnessOfFit) {
    if (o.theta.empty()) throw UsageError("gof requires --theta");
    cfg.theta0 = dpht::Theta::vector(parse_probs(o.theta, "--theta"));
  }
  for (const auto& input : o.inputs) {
    const auto loaded = load_input(input, g);
    if (loaded.noisy) throw UsageError("agreement needs exact tables; it privatizes them itself");
    cfg.tables.push_back(loaded.exact);
  }
  cfg.seed = resolve_seed(g);
  dpht::Json eps = dpht::Json::array();
  for (double e : cfg.epsilons) eps.push_back(dpht::real_to_json(e));
  dpht::Json inputs = dpht::Json::array();
  for (const auto& i : o.inputs) inputs.push_back(i);
  const dpht::Json config{{"command", "agreement"}, {"test", o.test},       {"inputs", inputs},
                          {"statistics", o.stats},  {"epsilons", eps},      {"repeats", o.repeats},
                          {"m", o.m},               {"seed", cfg.seed}};
  echo_config(config, g.threads);
  const auto rows = dpht::agreement_experiment(cfg);
  if (g.format == "json") {
    dpht::Json j{{"config", config}, {"rows", dpht::Json::array()}};
    for (const auto& r : rows) j["rows"].push_back(dpht::to_json(r));
    emit(g, j.dump(2));
  } else {
    std::ostringstream os;
    dpht::write_agreement_csv(os, rows);
    emit(g, os.str());
  }
  return kExitOk;
}

int exit_code_for(const dpht::Error& e) {
  switch (dpht::classify(e.code())) {
    case dpht::ErrorClass::Data: return kExitData;
    case dpht::ErrorClass::Numeric: return kExitNumeric;
    case dpht::ErrorClass::Infeasible: return kExitInfeasible;
  }
  return kExitNumeric;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentially private hypothesis tests for contingency tables"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  std::string seed_text;
  auto* seed_opt = app.add_option("--seed", seed_text, "RNG seed (falls back to DPHT_SEED, then OS entropy)");
  app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--out", g.out, "Output file (default stdout)");
  app.add_option("--threads", g.threads, "Worker threads (0 = all cores); output does not depend on it");
  app.add_flag("--header-row", g.header_row, "CSV input has a header row");
  app.add_flag("--header-col", g.header_col, "CSV input has a row-label column");

  std::function<int()> action;

  PrivatizeOptions po;
  auto* privatize = app.add_subcommand("privatize", "Add calibrated noise to an exact table");
  privatize->add_option("input", po.input, "Exact table (CSV, JSON, '-' or fixture:NAME)")->required();
  privatize->add_option("--epsilon", po.epsilon, "Privacy parameter (> 0 or 'inf')")->required();
  privatize->add_option("--sensitivity", po.sensitivity, "Query sensitivity");
  privatize->add_option("--noise", po.noise, "Noise family")->check(CLI::IsMember({"laplace", "gaussian"}));
  privatize->add_option("--scale", po.scale, "Gaussian sigma (default matches the Laplace variance)");
  privatize->callback([&] { action = [&] { return run_privatize(po, g); }; });

  TestOptions to;
  auto* test = app.add_subcommand("test", "Monte Carlo p-value from noisy tables");
  test->add_option("kind", to.kind, "independence | gof | proportions")
      ->required()
      ->check(CLI::IsMember({"independence", "gof", "proportions"}));
  test->add_option("inputs", to.inputs, "Noisy table(s)")->required();
  test->add_option("--stat", to.stat, "Statistic")->check(CLI::IsMember({"chi2", "lr", "lr_modified"}));
  test->add_option("--m", to.m, "Number of reference points");
  test->add_option("--theta", to.theta, "Null probabilities for gof, comma separated");
  test->add_option("--epsilon", to.epsilon, "Only 'inf': explicitly test exact data");
  test->add_flag("--smoothing", to.smoothing, "Report (exceed + 1) / (m + 1)");
  test->add_option("--gof-method", to.gof_method, "exact | gaussian reference sampler for gof");
  test->callback([&] { action = [&] { return run_test_cmd(to, g); }; });

  ReliabilityOptions ro;
  auto* rel = app.add_subcommand("reliability", "Q-Q calibration of p-values under the null");
  rel->add_option("--test", ro.test, "Test kind")->check(CLI::IsMember({"independence", "gof", "proportions"}));
  rel->add_option("--stat", ro.stat, "Statistic")->check(CLI::IsMember({"chi2", "lr", "lr_modified"}));
  rel->add_option("--n0", ro.n0, "Table size (independence, gof)");
  rel->add_option("--n1", ro.n1, "First sample size (proportions)");
  rel->add_option("--n2", ro.n2, "Second sample size (proportions)");
  rel->add_option("--p-row", ro.p_row, "Row probabilities");
  rel->add_option("--p-col", ro.p_col, "Column probabilities");
  rel->add_option("--theta", ro.theta, "Cell probabilities (gof, proportions)");
  rel->add_option("--epsilon", ro.epsilons, "Epsilon value(s); repeat or comma separate");
  rel->add_option("--trials", ro.trials, "Trials per epsilon");
  rel->add_option("--m", ro.m, "Reference points per trial");
  rel->add_option("--method", ro.method, "ours | naive_js")->check(CLI::IsMember({"ours", "naive_js"}));
  rel->add_option("--sensitivity", ro.sensitivity, "Sensitivity used for privatization");
  rel->add_option("--thin", ro.thin, "Write every k-th sorted point");
  rel->add_option("--summary", ro.summary, "Also write a JSON summary here");
  rel->callback([&] { action = [&] { return run_reliability(ro, g); }; });

  TestbedOptions tbo;
  auto* tb = app.add_subcommand("testbed", "Permutation testbed under marginal-neighbor privacy");
  tb->add_option("input", tbo.input, "Exact table")->required();
  tb->add_option("--stat", tbo.stat, "Statistic")->check(CLI::IsMember({"chi2", "lr", "ll", "diff"}));
  tb->add_option("--mode", tbo.mode, "input | output perturbation")->check(CLI::IsMember({"input", "output"}));
  tb->add_option("--epsilon", tbo.epsilon, "Privacy parameter (> 0 or 'inf')")->required();
  tb->add_option("--m", tbo.m, "Number of permutation tables");
  tb->callback([&] { action = [&] { return run_testbed(tbo, g); }; });

  SensitivityOptions so;
  auto* sens = app.add_subcommand("sensitivity", "Fixed-margin sensitivity s_h of a statistic");
  sens->add_option("input", so.input, "Exact table whose margins are used");
  sens->add_option("--stat", so.stat, "Statistic")->check(CLI::IsMember({"chi2", "lr", "ll", "diff"}));
  sens->add_option("--margins", so.margins, "Margins as 'r1,r2,...;c1,c2,...'");
  sens->add_flag("--brute-force", so.brute_force, "Also enumerate all tables as a cross-check");
  sens->callback([&] { action = [&] { return run_sensitivity(so, g); }; });

  AgreementOptions ao;
  auto* agree = app.add_subcommand("agreement", "Mean private p-value versus epsilon");
  agree->add_option("inputs", ao.inputs, "Exact table(s)")->required();
  agree->add_option("--test", ao.test, "Test kind")->check(CLI::IsMember({"independence", "gof", "proportions"}));
  agree->add_option("--stat", ao.stats, "Statistic(s)");
  agree->add_option("--epsilon", ao.epsilons, "Epsilon value(s)")->required();
  agree->add_option("--theta", ao.theta, "Null probabilities for gof");
  agree->add_option("--repeats", ao.repeats, "Privatizations per epsilon");
  agree->add_option("--m", ao.m, "Reference points");
  agree->add_option("--sensitivity", ao.sensitivity, "Sensitivity used for privatization");
  agree->callback([&] { action = [&] { return run_agreement(ao, g); }; });

  std::string fixture_name;
  auto* fixture = app.add_subcommand("fixture", "Print a builtin exact table");
  fixture->add_option("name", fixture_name, "election | nyc_taxi")->required();
  fixture->callback([&] {
    action = [&] {
      const auto t = dpht::builtin_fixture(fixture_name);
      emit(g, g.format == "csv" ? dpht::to_csv(t) : dpht::to_json(t).dump(2));
      return kExitOk;
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }
  if (seed_opt->count() > 0) g.seed = seed_text;

  try {
    return action();
  } catch (const UsageError& e) {
    std::cerr << "dpht: usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const dpht::Error& e) {
    std::cerr << "dpht: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "dpht: " << e.what() << "\n";
    return kExitData;
  }
}
