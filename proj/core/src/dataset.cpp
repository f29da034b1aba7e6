#include "coxgibbs/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>

#include "coxgibbs/errors.hpp"

namespace coxgibbs {

SurvivalDataset::SurvivalDataset(Eigen::VectorXd times, Eigen::VectorXi events,
                                 Eigen::MatrixXd covariates,
                                 std::vector<std::string> column_names)
    : times_(std::move(times)),
      events_(std::move(events)),
      covariates_(std::move(covariates)),
      column_names_(std::move(column_names)) {
  const Index n = times_.size();
  if (events_.size() != n || covariates_.rows() != n) {
    throw std::invalid_argument("SurvivalDataset: times, events and covariates disagree on n");
  }
  if (n < 2) throw std::invalid_argument("SurvivalDataset: need at least 2 subjects");
  if (covariates_.cols() < 1) throw std::invalid_argument("SurvivalDataset: need P >= 1");
  for (Index i = 0; i < n; ++i) {
    if (!std::isfinite(times_[i]) || times_[i] < 0.0) {
      throw std::invalid_argument("SurvivalDataset: times must be finite and non-negative");
    }
    if (events_[i] != 0 && events_[i] != 1) {
      throw std::invalid_argument("SurvivalDataset: events must be 0 or 1");
    }
  }
  if (!covariates_.allFinite()) {
    throw std::invalid_argument("SurvivalDataset: covariates must be finite");
  }
  if (column_names_.empty()) {
    for (Index k = 0; k < covariates_.cols(); ++k) column_names_.push_back("x" + std::to_string(k + 1));
  } else if (static_cast<Index>(column_names_.size()) != covariates_.cols()) {
    throw std::invalid_argument("SurvivalDataset: column_names size must equal P");
  }
}

SurvivalDataset SurvivalDataset::select_rows(std::span<const Index> rows) const {
  const Index m = static_cast<Index>(rows.size());
  Eigen::VectorXd t(m);
  Eigen::VectorXi e(m);
  Eigen::MatrixXd x(m, p());
  for (Index r = 0; r < m; ++r) {
    const Index i = rows[r];
    if (i < 0 || i >= n()) throw std::out_of_range("select_rows: index out of range");
    t[r] = times_[i];
    e[r] = events_[i];
    x.row(r) = covariates_.row(i);
  }
  return SurvivalDataset(std::move(t), std::move(e), std::move(x), column_names_);
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// Splits one record; double-quoted fields may contain commas and "" escapes.
std::vector<std::string> split_record(std::string_view line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    const char c = line[k];
    if (quoted) {
      if (c == '"') {
        if (k + 1 < line.size() && line[k + 1] == '"') {
          cur.push_back('"');
          ++k;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.emplace_back(trim(cur));
  return fields;
}

bool is_missing(std::string_view cell) { return cell.empty() || cell == "NA"; }

std::optional<double> parse_number(std::string_view cell) {
  double v = 0.0;
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) return std::nullopt;
  return v;
}

}  // namespace

LoadResult read_csv(std::istream& in, const CsvSchema& schema) {
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("csv: missing header row");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const auto header = split_record(line);

  auto column = [&](const std::string& name) -> std::size_t {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw SchemaError("csv: column '" + name + "' not found");
    return static_cast<std::size_t>(it - header.begin());
  };
  if (schema.covariate_cols.empty()) throw SchemaError("csv: no covariate columns selected");
  const std::size_t time_idx = column(schema.time_col);
  const std::size_t status_idx = column(schema.status_col);
  std::vector<std::size_t> cov_idx;
  for (const auto& c : schema.covariate_cols) cov_idx.push_back(column(c));

  std::vector<double> times;
  std::vector<int> events;
  std::vector<double> cov;
  std::set<long long> status_codes;
  std::size_t raw = 0, dropped = 0;

  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++raw;
    const auto cells = split_record(line);
    if (cells.size() != header.size()) {
      throw ParseError("csv: row " + std::to_string(raw) + " has " + std::to_string(cells.size()) +
                           " fields, header has " + std::to_string(header.size()),
                       raw);
    }
    bool missing = false;
    if (schema.missing == MissingScope::all_columns) {
      missing = std::any_of(cells.begin(), cells.end(), [](const std::string& c) { return is_missing(c); });
    } else {
      missing = is_missing(cells[time_idx]) || is_missing(cells[status_idx]) ||
                std::any_of(cov_idx.begin(), cov_idx.end(), [&](std::size_t k) { return is_missing(cells[k]); });
    }
    if (missing) {
      ++dropped;
      continue;
    }
    auto number = [&](std::size_t k) {
      auto v = parse_number(cells[k]);
      if (!v || !std::isfinite(*v)) {
        throw ParseError("csv: row " + std::to_string(raw) + ", column '" + header[k] +
                             "': not a number: '" + cells[k] + "'",
                         raw);
      }
      return *v;
    };
    const double t = number(time_idx);
    if (t < 0.0) throw ParseError("csv: row " + std::to_string(raw) + ": negative time", raw);
    const double s = number(status_idx);
    if (s != std::floor(s)) {
      throw ParseError("csv: row " + std::to_string(raw) + ": status must be an integer code", raw);
    }
    status_codes.insert(static_cast<long long>(s));
    if (status_codes.size() > 2) {
      throw SchemaError("csv: status column '" + schema.status_col + "' has more than two distinct codes");
    }
    times.push_back(t);
    events.push_back(static_cast<long long>(s) == schema.status_event_code ? 1 : 0);
    for (std::size_t k : cov_idx) cov.push_back(number(k));
  }

  const Index n = static_cast<Index>(times.size());
  if (n < 2) {
    throw InsufficientDataError("csv: " + std::to_string(n) + " complete rows, need at least 2");
  }
  const Index p = static_cast<Index>(cov_idx.size());
  Eigen::MatrixXd x = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      cov.data(), n, p);
  return LoadResult{
      SurvivalDataset(Eigen::Map<Eigen::VectorXd>(times.data(), n), Eigen::Map<Eigen::VectorXi>(events.data(), n),
                      std::move(x), schema.covariate_cols),
      raw, dropped};
}

LoadResult load_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw SchemaError("csv: cannot open '" + path.string() + "'");
  return read_csv(in, schema);
}

void write_csv(const SurvivalDataset& data, std::ostream& out) {
  char buf[32];
  out << "time,status";
  for (const auto& name : data.column_names()) out << ',' << name;
  out << '\n';
  auto put = [&](double v) {
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    out.write(buf, ptr - buf);
  };
  for (Index i = 0; i < data.n(); ++i) {
    put(data.times()[i]);
    out << ',' << data.events()[i];
    for (Index k = 0; k < data.p(); ++k) {
      out << ',';
      put(data.covariates()(i, k));
    }
    out << '\n';
  }
}

std::vector<Index> risk_set(const SurvivalDataset& data, Index i) {
  if (i < 0 || i >= data.n()) throw std::out_of_range("risk_set: subject index out of range");
  std::vector<Index> members;
  const double ti = data.times()[i];
  for (Index j = 0; j < data.n(); ++j) {
    if (data.times()[j] >= ti) members.push_back(j);
  }
  return members;
}

namespace {

std::vector<Index> time_order(const SurvivalDataset& data) {
  std::vector<Index> order(static_cast<std::size_t>(data.n()));
  std::iota(order.begin(), order.end(), Index{0});
  const auto& t = data.times();
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return t[a] < t[b]; });
  return order;
}

// Position of the first subject in `order` whose time is >= t.
std::size_t first_at_risk(const std::vector<Index>& order, const Eigen::VectorXd& times, double t) {
  auto it = std::lower_bound(order.begin(), order.end(), t,
                             [&](Index a, double value) { return times[a] < value; });
  return static_cast<std::size_t>(it - order.begin());
}

}  // namespace

std::size_t count_pairs(const SurvivalDataset& data) {
  const auto order = time_order(data);
  std::size_t q = 0;
  for (Index i = 0; i < data.n(); ++i) {
    if (data.events()[i] == 0) continue;
    q += order.size() - first_at_risk(order, data.times(), data.times()[i]) - 1;
  }
  return q;
}

PairContrasts build_pair_contrasts(const SurvivalDataset& data, std::size_t max_pairs) {
  const auto order = time_order(data);
  const auto& t = data.times();
  const auto& x = data.covariates();

  std::vector<std::size_t> start(static_cast<std::size_t>(data.n()), 0);
  std::size_t q = 0;
  for (Index i = 0; i < data.n(); ++i) {
    if (data.events()[i] == 0) continue;
    start[i] = first_at_risk(order, t, t[i]);
    q += order.size() - start[i] - 1;
  }
  if (q == 0) {
    throw EmptyPairsError("no (event, risk-set) pairs: the data has no events or only singleton risk sets");
  }
  if (q > max_pairs) {
    throw PairLimitError("pair count " + std::to_string(q) + " exceeds the limit of " +
                         std::to_string(max_pairs) +
                         "; subsample the data or raise the limit if memory allows (Q x P doubles)");
  }

  PairContrasts out;
  out.contrasts.resize(static_cast<Index>(q), data.p());
  out.pair_index.reserve(q);
  Index row = 0;
  for (Index i = 0; i < data.n(); ++i) {
    if (data.events()[i] == 0) continue;
    for (std::size_t k = start[i]; k < order.size(); ++k) {
      const Index j = order[k];
      if (j == i) continue;
      out.contrasts.row(row++) = x.row(i) - x.row(j);
      out.pair_index.emplace_back(i, j);
    }
  }
  return out;
}

}  // namespace coxgibbs
