#include "resbal/data.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "resbal/errors.hpp"

namespace resbal {

Dataset::Dataset(Matrix X, Vector W, Vector Y, std::vector<std::string> covariate_names)
    : X_(std::move(X)), W_(std::move(W)), Y_(std::move(Y)), names_(std::move(covariate_names)) {
  const Index n = X_.rows();
  if (n < 2) throw DataError("dataset needs at least 2 rows");
  if (X_.cols() < 1) throw DataError("dataset needs at least 1 covariate");
  if (W_.size() != n || Y_.size() != n)
    throw DataError("treatment/outcome length does not match covariate rows");
  if (!X_.allFinite()) throw DataError("covariate matrix has non-finite entries");
  if (!Y_.allFinite()) throw DataError("outcome has non-finite entries");
  for (Index i = 0; i < n; ++i) {
    if (W_(i) != 0.0 && W_(i) != 1.0) throw DataError("non-binary treatment at row " + std::to_string(i + 1));
  }
  n_treated_ = static_cast<Index>(W_.sum());
  if (n_treated_ == 0) throw DataError("empty treated arm");
  if (n_treated_ == n) throw DataError("empty control arm");
  if (names_.empty()) {
    for (Index j = 0; j < X_.cols(); ++j) names_.push_back("x" + std::to_string(j + 1));
  } else if (static_cast<Index>(names_.size()) != X_.cols()) {
    throw DataError("covariate name count does not match columns");
  }
}

Dataset Dataset::with_outcome(Vector Y) const { return Dataset(X_, W_, std::move(Y), names_); }

ArmView gather_rows(const Matrix& X, const Vector& Y, std::vector<Index> rows) {
  ArmView view;
  view.X.resize(static_cast<Index>(rows.size()), X.cols());
  view.Y.resize(static_cast<Index>(rows.size()));
  for (Index k = 0; k < static_cast<Index>(rows.size()); ++k) {
    view.X.row(k) = X.row(rows[k]);
    view.Y(k) = Y(rows[k]);
  }
  view.indices = std::move(rows);
  return view;
}

ArmSplit split_by_arm(const Dataset& data) {
  std::vector<Index> control, treated;
  for (Index i = 0; i < data.n(); ++i) (data.treated(i) ? treated : control).push_back(i);
  if (control.empty()) throw DataError("empty control arm");
  if (treated.empty()) throw DataError("empty treated arm");
  return {gather_rows(data.X(), data.Y(), std::move(control)),
          gather_rows(data.X(), data.Y(), std::move(treated))};
}

TargetMean treated_mean_covariates(const ArmView& treated) {
  if (treated.size() == 0) throw DataError("empty treated arm");
  return {treated.X.colwise().mean().transpose()};
}

namespace {

// One record of an RFC-4180 file. Quoted fields may contain commas, doubled
// quotes and line breaks.
bool read_record(std::istream& in, std::vector<std::string>& fields) {
  fields.clear();
  std::string field;
  bool in_quotes = false, any = false;
  char c;
  while (in.get(c)) {
    any = true;
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          field.push_back('"');
          in.get();
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      break;
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  if (!any) return false;
  if (in_quotes) throw DataError("unterminated quoted field");
  fields.push_back(std::move(field));
  return true;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

double parse_cell(const std::string& raw, std::size_t row, const std::string& column) {
  const std::string s = trim(raw);
  double value = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (!s.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (s.empty() || ec != std::errc() || ptr != last || !std::isfinite(value)) {
    throw DataError("missing or non-numeric value '" + s + "' at row " + std::to_string(row) +
                    ", column '" + column + "'");
  }
  return value;
}

}  // namespace

Dataset load_csv(const std::filesystem::path& path, const ColumnSpec& columns) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<std::string> header;
  if (!read_record(in, header)) throw DataError("empty file " + path.string());
  for (auto& h : header) h = trim(h);

  Index w_col = -1, y_col = -1;
  std::vector<Index> x_cols;
  std::vector<std::string> names;
  for (Index j = 0; j < static_cast<Index>(header.size()); ++j) {
    if (header[j] == columns.treatment) {
      w_col = j;
    } else if (header[j] == columns.outcome) {
      y_col = j;
    } else {
      x_cols.push_back(j);
      names.push_back(header[j]);
    }
  }
  if (w_col < 0) throw DataError("missing treatment column '" + columns.treatment + "'");
  if (y_col < 0) throw DataError("missing outcome column '" + columns.outcome + "'");

  std::vector<double> xs, ws, ys;
  std::vector<std::string> fields;
  std::size_t row = 0;
  while (read_record(in, fields)) {
    ++row;
    if (fields.size() == 1 && trim(fields[0]).empty()) continue;
    if (fields.size() != header.size())
      throw DataError("row " + std::to_string(row) + " has " + std::to_string(fields.size()) +
                      " fields, expected " + std::to_string(header.size()));
    const double w = parse_cell(fields[w_col], row, header[w_col]);
    if (w != 0.0 && w != 1.0)
      throw DataError("non-binary treatment value " + trim(fields[w_col]) + " at row " + std::to_string(row));
    ws.push_back(w);
    ys.push_back(parse_cell(fields[y_col], row, header[y_col]));
    for (Index j : x_cols) xs.push_back(parse_cell(fields[j], row, header[j]));
  }

  const Index n = static_cast<Index>(ws.size());
  const Index p = static_cast<Index>(x_cols.size());
  Matrix X(n, p);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < p; ++j) X(i, j) = xs[static_cast<std::size_t>(i * p + j)];
  return Dataset(std::move(X), Eigen::Map<Vector>(ws.data(), n), Eigen::Map<Vector>(ys.data(), n),
                 std::move(names));
}

namespace {

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

void save_csv(const Dataset& data, const std::filesystem::path& path, const ColumnSpec& columns) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << quote_if_needed(columns.outcome) << ',' << quote_if_needed(columns.treatment);
  for (const auto& name : data.covariate_names()) out << ',' << quote_if_needed(name);
  out << '\n' << std::setprecision(17);
  for (Index i = 0; i < data.n(); ++i) {
    out << data.Y()(i) << ',' << static_cast<int>(data.W()(i));
    for (Index j = 0; j < data.p(); ++j) out << ',' << data.X()(i, j);
    out << '\n';
  }
  if (!out) throw DataError("write failed for " + path.string());
}

}  // namespace resbal
