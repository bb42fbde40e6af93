#include "dpht/tables.hpp"

#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>

#include "dpht/error.hpp"

namespace dpht {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::int64_t parse_count(std::string_view field, std::size_t line_no) {
  field = trim(field);
  const std::string where = " (line " + std::to_string(line_no) + ")";
  if (field.empty()) throw Error(ErrorCode::NonRectangular, "empty field" + where);
  if (field.front() == '-') {
    throw Error(ErrorCode::NegativeCount, "negative count '" + std::string(field) + "'" + where);
  }
  std::int64_t value = 0;
  const auto* begin = field.data();
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw Error(ErrorCode::NonIntegerCount, "not a base-10 integer: '" + std::string(field) + "'" + where);
  }
  return value;
}

}  // namespace

CountTable::CountTable(std::size_t rows, std::size_t cols, std::vector<std::int64_t> counts)
    : rows_(rows), cols_(cols), counts_(std::move(counts)) {
  if (rows_ == 0 || cols_ == 0) throw Error(ErrorCode::EmptyInput, "table has no cells");
  if (counts_.size() != rows_ * cols_) throw Error(ErrorCode::NonRectangular, "cell count does not match shape");
  row_sums_.assign(rows_, 0);
  col_sums_.assign(cols_, 0);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = 0; j < cols_; ++j) {
      const std::int64_t v = counts_[i * cols_ + j];
      if (v < 0) throw Error(ErrorCode::NegativeCount, "negative count in table");
      row_sums_[i] += v;
      col_sums_[j] += v;
    }
  }
  total_ = std::accumulate(row_sums_.begin(), row_sums_.end(), std::int64_t{0});
}

CountTable CountTable::from_rows(const std::vector<std::vector<std::int64_t>>& rows) {
  if (rows.empty() || rows.front().empty()) throw Error(ErrorCode::EmptyInput, "table has no cells");
  const std::size_t cols = rows.front().size();
  std::vector<std::int64_t> flat;
  flat.reserve(rows.size() * cols);
  for (const auto& row : rows) {
    if (row.size() != cols) throw Error(ErrorCode::NonRectangular, "rows have different lengths");
    flat.insert(flat.end(), row.begin(), row.end());
  }
  return CountTable(rows.size(), cols, std::move(flat));
}

Margins margins(const CountTable& t) { return Margins{t.row_sums(), t.col_sums(), t.total()}; }

std::vector<double> RealTable::row_sums() const {
  std::vector<double> sums(rows, 0.0);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) sums[i] += at(i, j);
  return sums;
}

std::vector<double> RealTable::col_sums() const {
  std::vector<double> sums(cols, 0.0);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) sums[j] += at(i, j);
  return sums;
}

double RealTable::total() const { return std::accumulate(values.begin(), values.end(), 0.0); }

RealTable to_real(const CountTable& t) {
  RealTable out{t.rows(), t.cols(), {}};
  out.values.assign(t.counts().begin(), t.counts().end());
  return out;
}

Theta Theta::vector(std::vector<double> p) {
  Theta theta{1, p.size(), std::move(p)};
  validate_theta(theta);
  return theta;
}

Theta Theta::matrix(std::size_t rows, std::size_t cols, std::vector<double> p) {
  Theta theta{rows, cols, std::move(p)};
  validate_theta(theta);
  return theta;
}

void validate_theta(const Theta& theta) {
  if (theta.p.empty() || theta.p.size() != theta.rows * theta.cols) {
    throw Error(ErrorCode::InvalidArgument, "theta shape mismatch");
  }
  double sum = 0.0;
  for (double v : theta.p) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "theta entries must be >= 0");
    sum += v;
  }
  if (std::fabs(sum - 1.0) > 1e-12) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "theta must sum to 1 (sum = " << sum << ")";
    throw Error(ErrorCode::InvalidArgument, msg.str());
  }
}

std::vector<double> parse_real_list(std::string_view text) {
  std::vector<double> out;
  for (auto field : split(text, ',')) {
    field = trim(field);
    if (field.empty()) throw Error(ErrorCode::InvalidArgument, "empty entry in list");
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
      throw Error(ErrorCode::InvalidArgument, "not a number: '" + std::string(field) + "'");
    }
    out.push_back(v);
  }
  return out;
}

CountTable parse_table(std::string_view text, const ParseOptions& options) {
  std::vector<std::vector<std::int64_t>> rows;
  std::size_t line_no = 0;
  bool header_skipped = false;
  for (auto line : split(text, '\n')) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    if (options.skip_header_row && !header_skipped) {
      header_skipped = true;
      continue;
    }
    auto fields = split(line, ',');
    if (options.skip_header_col) {
      if (fields.size() < 2) throw Error(ErrorCode::NonRectangular, "row has no data after header column");
      fields.erase(fields.begin());
    }
    std::vector<std::int64_t> row;
    row.reserve(fields.size());
    for (auto field : fields) row.push_back(parse_count(field, line_no));
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw Error(ErrorCode::NonRectangular,
                  "line " + std::to_string(line_no) + " has " + std::to_string(row.size()) + " fields, expected " +
                      std::to_string(rows.front().size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(ErrorCode::EmptyInput, "no table rows found");
  return CountTable::from_rows(rows);
}

std::string to_csv(const CountTable& t) {
  std::string out;
  for (std::size_t i = 0; i < t.rows(); ++i) {
    for (std::size_t j = 0; j < t.cols(); ++j) {
      if (j) out += ',';
      out += std::to_string(t.at(i, j));
    }
    out += '\n';
  }
  return out;
}

}  // namespace dpht
