#include "dpht/testbed.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

#include "dpht/error.hpp"

namespace dpht {

namespace {

/// Statistic on integer cells with margins held fixed; E and log-factorials
/// are precomputed once per margin set.
class FixedMarginStat {
 public:
  FixedMarginStat(StatisticKind stat, const Margins& mg) : stat_(stat), rows_(mg.row_sums.size()),
                                                           cols_(mg.col_sums.size()) {
    const double n = static_cast<double>(mg.total);
    expected_.resize(rows_ * cols_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j)
        expected_[i * cols_ + j] = static_cast<double>(mg.row_sums[i]) * static_cast<double>(mg.col_sums[j]) / n;
    lfact_.resize(static_cast<std::size_t>(mg.total) + 1);
    for (std::size_t k = 0; k < lfact_.size(); ++k) lfact_[k] = std::lgamma(static_cast<double>(k) + 1.0);
    double c = -lfact_[static_cast<std::size_t>(mg.total)];
    for (auto r : mg.row_sums) c += lfact_[static_cast<std::size_t>(r)];
    for (auto s : mg.col_sums) c += lfact_[static_cast<std::size_t>(s)];
    ll_const_ = c;
  }

  double operator()(const std::vector<std::int64_t>& t) const {
    double s = 0.0;
    switch (stat_) {
      case StatisticKind::Chi2:
        for (std::size_t k = 0; k < t.size(); ++k) {
          const double d = static_cast<double>(t[k]) - expected_[k];
          s += d * d / expected_[k];
        }
        return s;
      case StatisticKind::LR:
      case StatisticKind::LRModified:
        for (std::size_t k = 0; k < t.size(); ++k) {
          const double v = static_cast<double>(t[k]);
          if (t[k] > 0) s += v * std::log(v / expected_[k]);
        }
        return 2.0 * s;
      case StatisticKind::LL:
        for (auto v : t) s += lfact_[static_cast<std::size_t>(v)];
        return -(ll_const_ - s);
      case StatisticKind::Diff:
        for (std::size_t k = 0; k < t.size(); ++k) s += std::fabs(static_cast<double>(t[k]) - expected_[k]);
        return s;
    }
    return s;
  }

 private:
  StatisticKind stat_;
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> expected_;
  std::vector<double> lfact_;
  double ll_const_ = 0.0;
};

/// Visits every nonnegative integer table with the given margins. Values in
/// each cell are bounded so every partial fill completes. Returns false if
/// the visitor asked to stop.
bool enumerate_tables(const Margins& mg, const std::function<bool(const std::vector<std::int64_t>&)>& visit) {
  const std::size_t rows = mg.row_sums.size();
  const std::size_t cols = mg.col_sums.size();
  std::vector<std::int64_t> cells(rows * cols, 0);
  std::vector<std::int64_t> col_left = mg.col_sums;

  std::function<bool(std::size_t, std::size_t, std::int64_t)> fill = [&](std::size_t i, std::size_t j,
                                                                         std::int64_t row_left) -> bool {
    if (i == rows - 1) {
      for (std::size_t k = 0; k < cols; ++k) cells[i * cols + k] = col_left[k];
      return visit(cells);
    }
    if (j == cols - 1) {
      if (row_left > col_left[j]) return true;
      cells[i * cols + j] = row_left;
      col_left[j] -= row_left;
      const bool go = fill(i + 1, 0, mg.row_sums[i + 1]);
      col_left[j] += row_left;
      return go;
    }
    std::int64_t rest = 0;
    for (std::size_t k = j + 1; k < cols; ++k) rest += col_left[k];
    const std::int64_t lo = std::max<std::int64_t>(0, row_left - rest);
    const std::int64_t hi = std::min(row_left, col_left[j]);
    for (std::int64_t v = lo; v <= hi; ++v) {
      cells[i * cols + j] = v;
      col_left[j] -= v;
      const bool go = fill(i, j + 1, row_left - v);
      col_left[j] += v;
      if (!go) return false;
    }
    return true;
  };
  return fill(0, 0, mg.row_sums[0]);
}

/// Drops zero rows and columns.
Margins positive_part(const Margins& mg) {
  Margins out;
  for (auto r : mg.row_sums)
    if (r > 0) out.row_sums.push_back(r);
  for (auto c : mg.col_sums)
    if (c > 0) out.col_sums.push_back(c);
  out.total = mg.total;
  return out;
}

double f_lr(double x) { return xlogx(x) - xlogx(x - 1.0); }

struct Candidate {
  double value = -1.0;
  std::string branch;
  void offer(double v, const std::string& name) {
    if (v > value) {
      value = v;
      branch = name;
    }
  }
};

Candidate closed_form_2x2(StatisticKind stat, const Margins& mg) {
  const double r1 = static_cast<double>(mg.row_sums[0]);
  const double r2 = static_cast<double>(mg.row_sums[1]);
  const double c1 = static_cast<double>(mg.col_sums[0]);
  const double c2 = static_cast<double>(mg.col_sums[1]);
  const double n = r1 + r2;
  const double C = n * n / (c1 * c2 * r1 * r2);
  Candidate best;
  // First pair of cases: R1 <= C1 (equivalently R2 >= C2) or its complement.
  if (r1 <= c1) {
    switch (stat) {
      case StatisticKind::Chi2: best.offer(C * std::fabs(n - 2.0 * c2 * r1), "2x2 R1<=C1"); break;
      case StatisticKind::LL:
        best.offer(std::fabs(std::log(r2 - c2 + 1.0) - std::log(r1) - std::log(c2)), "2x2 R1<=C1");
        break;
      default: best.offer(2.0 * std::fabs(f_lr(r1) + f_lr(c2) - f_lr(r2 - c2 + 1.0)), "2x2 R1<=C1"); break;
    }
  } else {
    switch (stat) {
      case StatisticKind::Chi2: best.offer(C * std::fabs(n - 2.0 * c1 * r2), "2x2 R1>C1"); break;
      case StatisticKind::LL:
        best.offer(std::fabs(std::log(c2 - r2 + 1.0) - std::log(r2) - std::log(c1)), "2x2 R1>C1");
        break;
      default: best.offer(2.0 * std::fabs(f_lr(r2) + f_lr(c1) - f_lr(c2 - r2 + 1.0)), "2x2 R1>C1"); break;
    }
  }
  // Second pair: R1 <= C2 (equivalently R2 >= C1) or its complement.
  if (r1 <= c2) {
    switch (stat) {
      case StatisticKind::Chi2: best.offer(C * std::fabs(n - 2.0 * c1 * r1), "2x2 R1<=C2"); break;
      case StatisticKind::LL:
        best.offer(std::fabs(std::log(r1) + std::log(c1) - std::log(r2 - c1 + 1.0)), "2x2 R1<=C2");
        break;
      default: best.offer(2.0 * std::fabs(-f_lr(r1) - f_lr(c1) + f_lr(r2 - c1 + 1.0)), "2x2 R1<=C2"); break;
    }
  } else {
    switch (stat) {
      case StatisticKind::Chi2: best.offer(C * std::fabs(n - 2.0 * c2 * r2), "2x2 R1>C2"); break;
      case StatisticKind::LL:
        best.offer(std::fabs(std::log(r2) + std::log(c2) - std::log(r1 - c2 + 1.0)), "2x2 R1>C2");
        break;
      default: best.offer(2.0 * std::fabs(-f_lr(r2) - f_lr(c2) + f_lr(r1 - c2 + 1.0)), "2x2 R1>C2"); break;
    }
  }
  return best;
}

Candidate closed_form_rxc(StatisticKind stat, const Margins& mg) {
  const std::size_t rows = mg.row_sums.size();
  const std::size_t cols = mg.col_sums.size();
  const double n = static_cast<double>(mg.total);
  Candidate best;
  auto label = [](const char* kind, std::size_t i1, std::size_t i2, std::size_t j1, std::size_t j2) {
    std::ostringstream os;
    os << "rxc " << kind << " (" << i1 + 1 << ',' << i2 + 1 << ',' << j1 + 1 << ',' << j2 + 1 << ')';
    return os.str();
  };
  for (std::size_t i1 = 0; i1 < rows; ++i1) {
    for (std::size_t i2 = 0; i2 < rows; ++i2) {
      if (i1 == i2) continue;
      for (std::size_t j1 = 0; j1 < cols; ++j1) {
        for (std::size_t j2 = 0; j2 < cols; ++j2) {
          if (j1 == j2) continue;
          const double R1 = static_cast<double>(mg.row_sums[i1]);
          const double R2 = static_cast<double>(mg.row_sums[i2]);
          const double C1 = static_cast<double>(mg.col_sums[j1]);
          const double C2 = static_cast<double>(mg.col_sums[j2]);
          const double a = std::min(R1, C1);
          const double d = std::min(R2, C2);
          const double b = std::min(R1, C2) - 1.0;
          const double c = std::min(R2, C1) - 1.0;
          double v_ad = 0.0;
          double v_bc = 0.0;
          switch (stat) {
            case StatisticKind::Chi2: {
              const double Cp = n * n / (C1 * C2 * R1 * R2);
              v_ad = Cp * std::fabs(2.0 * (R2 * C2 * a + R1 * C1 * d) - (R1 + R2) * (C1 + C2)) / n;
              v_bc = Cp * std::fabs((R1 - R2) * (C1 - C2) - 2.0 * (R2 * C1 * b + R1 * C2 * c)) / n;
              break;
            }
            case StatisticKind::LL:
              v_ad = std::log(a * d);
              v_bc = std::log((b + 1.0) * (c + 1.0));
              break;
            default:
              v_ad = 2.0 * (f_lr(a) + f_lr(d));
              v_bc = 2.0 * (f_lr(b + 1.0) + f_lr(c + 1.0));
              break;
          }
          if (v_ad > best.value) best.offer(v_ad, label("a,d", i1, i2, j1, j2));
          if (v_bc > best.value) best.offer(v_bc, label("b,c", i1, i2, j1, j2));
        }
      }
    }
  }
  return best;
}

}  // namespace

Margins make_margins(std::vector<std::int64_t> row_sums, std::vector<std::int64_t> col_sums) {
  if (row_sums.empty() || col_sums.empty()) throw Error(ErrorCode::EmptyInput, "margins need rows and columns");
  for (auto v : row_sums)
    if (v < 0) throw Error(ErrorCode::NegativeCount, "negative row sum");
  for (auto v : col_sums)
    if (v < 0) throw Error(ErrorCode::NegativeCount, "negative column sum");
  const auto rt = std::accumulate(row_sums.begin(), row_sums.end(), std::int64_t{0});
  const auto ct = std::accumulate(col_sums.begin(), col_sums.end(), std::int64_t{0});
  if (rt != ct) throw Error(ErrorCode::InvalidArgument, "row and column sums have different totals");
  return Margins{std::move(row_sums), std::move(col_sums), rt};
}

Margins parse_margins(const std::string& text) {
  auto split = text.find(';');
  if (split == std::string::npos) split = text.find('/');
  if (split == std::string::npos) throw Error(ErrorCode::InvalidArgument, "margins must look like 'r1,r2;c1,c2'");
  auto to_ints = [](const std::string& part) {
    std::vector<std::int64_t> out;
    for (double v : parse_real_list(part)) {
      if (v != std::floor(v)) throw Error(ErrorCode::NonIntegerCount, "margins must be integers");
      out.push_back(static_cast<std::int64_t>(v));
    }
    return out;
  };
  return make_margins(to_ints(text.substr(0, split)), to_ints(text.substr(split + 1)));
}

CountTable permutation_null_sample(const Margins& mg, Stream& rng) {
  const std::size_t rows = mg.row_sums.size();
  const std::size_t cols = mg.col_sums.size();
  std::vector<std::uint32_t> row_labels;
  row_labels.reserve(static_cast<std::size_t>(mg.total));
  for (std::size_t i = 0; i < rows; ++i) row_labels.insert(row_labels.end(), mg.row_sums[i], static_cast<std::uint32_t>(i));
  rng.shuffle(std::span<std::uint32_t>(row_labels));
  std::vector<std::int64_t> cells(rows * cols, 0);
  std::size_t pos = 0;
  for (std::size_t j = 0; j < cols; ++j) {
    for (std::int64_t k = 0; k < mg.col_sums[j]; ++k) ++cells[row_labels[pos++] * cols + j];
  }
  return CountTable(rows, cols, std::move(cells));
}

std::string mode_name(PerturbMode mode) { return mode == PerturbMode::Input ? "input" : "output"; }

PerturbMode parse_mode(const std::string& name) {
  if (name == "input") return PerturbMode::Input;
  if (name == "output") return PerturbMode::Output;
  throw Error(ErrorCode::InvalidArgument, "unknown perturbation mode '" + name + "'");
}

NoisyTable mn_input_perturb(const CountTable& t, double epsilon, Stream& rng, std::uint64_t seed_for_record) {
  NoisyTable out = perturb_table(t, NoiseSpec::laplace(epsilon, kMarginalNeighborSensitivity), rng, seed_for_record);
  out.provenance.mode = PrivacyMode::MarginalNeighbor;
  return out;
}

double mn_output_perturb(double stat_value, double s_h, double epsilon, Stream& rng) {
  if (!(s_h > 0.0)) throw Error(ErrorCode::NonPositiveSensitivity, "s_h must be > 0");
  if (!(epsilon > 0.0)) throw Error(ErrorCode::NonPositiveEpsilon, "epsilon must be > 0");
  if (std::isinf(epsilon)) return stat_value;
  return stat_value + rng.laplace(s_h / epsilon);
}

bool SensitivityReport::has_flag(const std::string& flag) const {
  return std::find(flags.begin(), flags.end(), flag) != flags.end();
}

std::size_t count_tables(const Margins& mg, std::size_t cap) {
  std::size_t count = 0;
  enumerate_tables(mg, [&](const std::vector<std::int64_t>&) { return ++count <= cap; });
  return count;
}

double brute_force_sensitivity(StatisticKind stat, const Margins& mg, std::size_t cap) {
  const Margins pos = positive_part(mg);
  if (pos.row_sums.size() < 2 || pos.col_sums.size() < 2) return 0.0;
  if (count_tables(pos, cap) > cap) {
    throw Error(ErrorCode::TooLarge, "more than " + std::to_string(cap) + " tables share these margins");
  }
  const FixedMarginStat h(stat, pos);
  const std::size_t rows = pos.row_sums.size();
  const std::size_t cols = pos.col_sums.size();
  double best = 0.0;
  std::vector<std::int64_t> nb;
  enumerate_tables(pos, [&](const std::vector<std::int64_t>& t) {
    const double base = h(t);
    for (std::size_t i1 = 0; i1 < rows; ++i1)
      for (std::size_t i2 = 0; i2 < rows; ++i2) {
        if (i1 == i2) continue;
        for (std::size_t j1 = 0; j1 < cols; ++j1)
          for (std::size_t j2 = 0; j2 < cols; ++j2) {
            if (j1 == j2) continue;
            if (t[i1 * cols + j1] < 1 || t[i2 * cols + j2] < 1) continue;
            nb = t;
            --nb[i1 * cols + j1];
            --nb[i2 * cols + j2];
            ++nb[i1 * cols + j2];
            ++nb[i2 * cols + j1];
            best = std::max(best, std::fabs(base - h(nb)));
          }
      }
    return true;
  });
  return best;
}

SensitivityReport sensitivity(StatisticKind stat, const Margins& mg, bool with_brute_force) {
  SensitivityReport rep;
  rep.statistic = stat;
  rep.margins = mg;
  const Margins pos = positive_part(mg);
  if (pos.row_sums.size() != mg.row_sums.size() || pos.col_sums.size() != mg.col_sums.size()) {
    rep.flags.emplace_back("zero_margin");
  }
  const bool has_unit = std::any_of(pos.row_sums.begin(), pos.row_sums.end(), [](auto v) { return v == 1; }) ||
                        std::any_of(pos.col_sums.begin(), pos.col_sums.end(), [](auto v) { return v == 1; });
  const std::size_t rows = pos.row_sums.size();
  const std::size_t cols = pos.col_sums.size();

  if (stat == StatisticKind::Diff) {
    rep.s_h = kDiffSensitivity;
    rep.branch = "diff constant";
  } else if (rows < 2 || cols < 2) {
    rep.s_h = 0.0;
    rep.branch = "single table";
  } else if (rows == 2 && cols == 2) {
    const Candidate c = closed_form_2x2(stat, pos);
    rep.s_h = c.value;
    rep.branch = c.branch;
  } else if (rows >= 3 && cols >= 3) {
    const Candidate c = closed_form_rxc(stat, pos);
    rep.s_h = c.value;
    rep.branch = c.branch;
    if (has_unit) rep.flags.emplace_back("unit_margin");
  } else {
    rep.flags.emplace_back("brute_force_fallback");
    try {
      rep.s_h = brute_force_sensitivity(stat, pos);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::TooLarge) throw;
      throw Error(ErrorCode::UnsupportedShape, "no closed form for a " + std::to_string(rows) + "x" +
                                                   std::to_string(cols) +
                                                   " table and brute force is too large");
    }
    rep.branch = "brute force";
    rep.brute_force = rep.s_h;
  }
  if (with_brute_force && !rep.brute_force) rep.brute_force = brute_force_sensitivity(stat, mg);
  return rep;
}

double testbed_statistic(StatisticKind stat, const CountTable& t) {
  switch (stat) {
    case StatisticKind::Chi2: return chi2_independence(to_real(t)).stat.value;
    case StatisticKind::LR: return lr_independence(to_real(t)).stat.value;
    case StatisticKind::LRModified: {
      const RealTable r = to_real(t);
      const auto chi = chi2_independence(r);
      return lr_modified(r.values, chi.expected.values).value;
    }
    case StatisticKind::LL: return ll_statistic(t);
    case StatisticKind::Diff: return diff_statistic(to_real(t));
  }
  throw Error(ErrorCode::InvalidArgument, "unknown statistic");
}

double testbed_statistic(StatisticKind stat, const RealTable& t) {
  switch (stat) {
    case StatisticKind::Chi2: return chi2_independence(t).stat.value;
    case StatisticKind::LR: return lr_independence(t).stat.value;
    case StatisticKind::LRModified: {
      const auto chi = chi2_independence(t);
      return lr_modified(t.values, chi.expected.values).value;
    }
    case StatisticKind::LL: return ll_statistic_noisy(t).value;
    case StatisticKind::Diff: return diff_statistic(t);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown statistic");
}

TestResult testbed_pvalue(const CountTable& t, const TestbedRequest& req) {
  const Margins mg = margins(t);
  const bool infinite = std::isinf(req.epsilon);
  if (!(req.epsilon > 0.0)) throw Error(ErrorCode::NonPositiveEpsilon, "epsilon must be > 0");

  std::vector<std::string> flags;
  NoiseSpec spec = NoiseSpec::identity();
  double s_h = 0.0;
  if (req.mode == PerturbMode::Input) {
    spec = NoiseSpec::laplace(req.epsilon, kMarginalNeighborSensitivity);
  } else if (!infinite) {
    const SensitivityReport rep = sensitivity(req.statistic, mg);
    s_h = rep.s_h;
    for (const auto& f : rep.flags) flags.push_back(f);
    if (s_h > 0.0) spec = NoiseSpec::laplace(req.epsilon, s_h);
  }

  auto h = [&](const CountTable& tab, Stream& rng) -> double {
    if (req.mode == PerturbMode::Input) {
      const NoisyTable nt = mn_input_perturb(tab, req.epsilon, rng);
      return testbed_statistic(req.statistic, nt.table);
    }
    const double v = testbed_statistic(req.statistic, tab);
    return s_h > 0.0 ? mn_output_perturb(v, s_h, req.epsilon, rng) : v;
  };

  Stream release(derive_seed(req.seed, "release"));
  const double t_star = h(t, release);

  std::atomic<bool> degenerate{false};
  auto sampler = [&](Stream& rng) -> double {
    const CountTable pseudo = permutation_null_sample(mg, rng);
    try {
      return h(pseudo, rng);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DegenerateMargins && e.code() != ErrorCode::DegenerateTotal) throw;
      degenerate = true;
      return kInfinity;
    }
  };
  TestResult out = monte_carlo_pvalue(t_star, sampler, req.m, req.seed, req.threads);
  out.test = TestKind::Independence;
  out.statistic = req.statistic;
  out.flags = std::move(flags);
  if (degenerate) out.flags.emplace_back("degenerate_reference");
  if (req.mode == PerturbMode::Input && req.statistic == StatisticKind::LL && !infinite) {
    out.flags.emplace_back("rounded");
  }
  Provenance prov;
  prov.noise = spec;
  prov.seed = req.seed;
  prov.mode = PrivacyMode::MarginalNeighbor;
  out.inputs.push_back(prov);
  return out;
}

TestResult testbed_pvalue(const CountTable& t, StatisticKind stat, PerturbMode mode, double epsilon, std::size_t m,
                          std::uint64_t seed, unsigned threads) {
  TestbedRequest req;
  req.statistic = stat;
  req.mode = mode;
  req.epsilon = epsilon;
  req.m = m;
  req.seed = seed;
  req.threads = threads;
  return testbed_pvalue(t, req);
}

}  // namespace dpht
