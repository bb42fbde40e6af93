#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dpht {

/// Exact nonnegative contingency table, row-major. A 1-D table is 1 x c.
/// Immutable after construction; margins are cached.
class CountTable {
 public:
  CountTable() = default;
  CountTable(std::size_t rows, std::size_t cols, std::vector<std::int64_t> counts);
  static CountTable from_rows(const std::vector<std::vector<std::int64_t>>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return counts_.size(); }
  std::int64_t total() const { return total_; }
  std::int64_t at(std::size_t i, std::size_t j) const { return counts_[i * cols_ + j]; }
  std::span<const std::int64_t> counts() const { return counts_; }
  const std::vector<std::int64_t>& row_sums() const { return row_sums_; }
  const std::vector<std::int64_t>& col_sums() const { return col_sums_; }

  bool operator==(const CountTable& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_ && counts_ == other.counts_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::int64_t> counts_;
  std::vector<std::int64_t> row_sums_;
  std::vector<std::int64_t> col_sums_;
  std::int64_t total_ = 0;
};

struct Margins {
  std::vector<std::int64_t> row_sums;
  std::vector<std::int64_t> col_sums;
  std::int64_t total = 0;
};

Margins margins(const CountTable& t);

/// Real-valued r x c grid (noisy counts, expected counts, ...), row-major.
struct RealTable {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  double at(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
  double& at(std::size_t i, std::size_t j) { return values[i * cols + j]; }
  std::vector<double> row_sums() const;
  std::vector<double> col_sums() const;
  double total() const;
};

RealTable to_real(const CountTable& t);

/// Probability vector or matrix over cells. Entries >= 0 and sum to 1 within 1e-12.
struct Theta {
  std::size_t rows = 1;
  std::size_t cols = 0;
  std::vector<double> p;

  static Theta vector(std::vector<double> p);
  static Theta matrix(std::size_t rows, std::size_t cols, std::vector<double> p);
  double at(std::size_t i, std::size_t j) const { return p[i * cols + j]; }
  std::size_t size() const { return p.size(); }
};

/// Validates the simplex invariant; throws InvalidArgument.
void validate_theta(const Theta& theta);

/// Parses a comma-separated list of probabilities ("0.25,0.25,0.5").
std::vector<double> parse_real_list(std::string_view text);

struct ParseOptions {
  bool skip_header_row = false;
  bool skip_header_col = false;
};

/// CSV of base-10 nonnegative integers, one table row per line.
CountTable parse_table(std::string_view text, const ParseOptions& options = {});
std::string to_csv(const CountTable& t);

}  // namespace dpht
