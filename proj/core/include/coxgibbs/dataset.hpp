#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace coxgibbs {

using Index = Eigen::Index;

/// Right-censored survival observations (T_i, delta_i, X_i). Validated on
/// construction and immutable afterwards.
class SurvivalDataset {
 public:
  /// Throws std::invalid_argument on shape mismatch, negative or non-finite
  /// times, event codes other than 0/1, non-finite covariates, n < 2 or P < 1.
  SurvivalDataset(Eigen::VectorXd times, Eigen::VectorXi events, Eigen::MatrixXd covariates,
                  std::vector<std::string> column_names = {});

  const Eigen::VectorXd& times() const noexcept { return times_; }
  const Eigen::VectorXi& events() const noexcept { return events_; }
  const Eigen::MatrixXd& covariates() const noexcept { return covariates_; }
  const std::vector<std::string>& column_names() const noexcept { return column_names_; }

  Index n() const noexcept { return times_.size(); }
  Index p() const noexcept { return covariates_.cols(); }
  Index event_count() const noexcept { return events_.sum(); }

  /// Rows in the given order; repeats allowed (bootstrap resampling).
  SurvivalDataset select_rows(std::span<const Index> rows) const;

 private:
  Eigen::VectorXd times_;
  Eigen::VectorXi events_;
  Eigen::MatrixXd covariates_;
  std::vector<std::string> column_names_;
};

enum class MissingScope {
  selected_columns,  ///< drop rows missing a time, status or covariate value
  all_columns,       ///< drop rows missing any value in the file (complete-case)
};

struct CsvSchema {
  std::string time_col = "time";
  std::string status_col = "status";
  std::vector<std::string> covariate_cols;
  int status_event_code = 1;
  MissingScope missing = MissingScope::selected_columns;
};

struct LoadResult {
  SurvivalDataset data;
  std::size_t raw_rows = 0;
  std::size_t dropped_rows = 0;
};

/// Reads a header-first, comma-separated file. Empty cells and the literal
/// "NA" are missing; anything else in a used column must parse as a number.
LoadResult load_csv(const std::filesystem::path& path, const CsvSchema& schema);
LoadResult read_csv(std::istream& in, const CsvSchema& schema);

/// Writes columns time,status,x1..xP (or the dataset's column names when
/// present) with status 1 = event, 0 = censored.
void write_csv(const SurvivalDataset& data, std::ostream& out);

/// R(T_i) = { j : T_j >= T_i }, ascending subject index. Contains i.
std::vector<Index> risk_set(const SurvivalDataset& data, Index i);

/// Contrast rows X_i - X_j for every event subject i and j in R(T_i) \ {i}.
struct PairContrasts {
  Eigen::MatrixXd contrasts;                  ///< Q x P
  std::vector<std::pair<Index, Index>> pair_index;  ///< (i, j) per row

  Index size() const noexcept { return contrasts.rows(); }
  Index p() const noexcept { return contrasts.cols(); }
};

inline constexpr std::size_t kDefaultMaxPairs = 50'000'000;

/// Sum over events of |R(T_i)| - 1, via sort plus binary search.
std::size_t count_pairs(const SurvivalDataset& data);

/// Rows are ordered by ascending event subject i, then by the risk-set
/// members in ascending (time, index) order. Throws EmptyPairsError when
/// Q = 0 and PairLimitError when Q exceeds max_pairs.
PairContrasts build_pair_contrasts(const SurvivalDataset& data,
                                   std::size_t max_pairs = kDefaultMaxPairs);

}  // namespace coxgibbs
