#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "psm/dataset.hpp"

namespace psm {

enum class TermKind { Numeric, Categorical };

struct Term {
  std::string column;
  TermKind kind = TermKind::Numeric;
  // Categorical only: the baseline level, which gets no dummy column.
  std::string reference;
  // Categorical only: optional explicit level order. Empty means the
  // column's own (first-appearance) order.
  std::vector<std::string> levels;
};

struct ModelSpec {
  std::string response;  // must be a binary column
  std::vector<Term> terms;

  // Throws DataError if a column is missing, has the wrong kind, or a
  // reference level is not among the column's levels.
  void validate(const Dataset& d) const;
};

// `<column>_<level>` with spaces replaced by underscores, e.g.
// education_hs_drop_out.
std::string indicator_name(std::string_view column, std::string_view level);

// Level order used for a categorical term: the override when present,
// else the column's level order.
std::vector<std::string> resolved_levels(const Column& column, const Term& term);

struct DesignMatrix {
  Eigen::MatrixXd x;  // n_rows x p, column 0 is the intercept
  Eigen::VectorXd y;  // 0/1 response
  std::vector<std::string> column_names;
  std::vector<std::size_t> row_ids;

  std::size_t n_rows() const { return static_cast<std::size_t>(x.rows()); }
  std::size_t n_cols() const { return static_cast<std::size_t>(x.cols()); }
};

// Columns: intercept, then each term in spec order. A categorical term
// contributes one dummy per non-reference level in resolved level order;
// a numeric (or binary) term contributes its values.
DesignMatrix encode_design_matrix(const Dataset& d, const ModelSpec& spec);

}  // namespace psm
