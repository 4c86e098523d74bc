#include "psm/design.hpp"

#include <algorithm>

#include "psm/errors.hpp"

namespace psm {

std::string indicator_name(std::string_view column, std::string_view level) {
  std::string name(column);
  name.push_back('_');
  for (char c : level) name.push_back(c == ' ' ? '_' : c);
  return name;
}

std::vector<std::string> resolved_levels(const Column& column, const Term& term) {
  const auto& cat = column.as_categorical();
  return term.levels.empty() ? cat.levels : term.levels;
}

void ModelSpec::validate(const Dataset& d) const {
  const auto& resp = d.column(response);
  if (resp.kind() != ColumnKind::Binary)
    throw DataError("response '" + response + "' is not binary");
  for (const auto& term : terms) {
    const auto& col = d.column(term.column);
    if (term.kind == TermKind::Numeric) {
      if (col.kind() == ColumnKind::Categorical)
        throw DataError("term '" + term.column + "' is declared numeric but column is categorical");
      continue;
    }
    const auto levels = resolved_levels(col, term);
    if (std::find(levels.begin(), levels.end(), term.reference) == levels.end())
      throw DataError("reference level '" + term.reference + "' is not a level of '" +
                      term.column + "'");
  }
}

DesignMatrix encode_design_matrix(const Dataset& d, const ModelSpec& spec) {
  spec.validate(d);
  const auto n = static_cast<Eigen::Index>(d.n_rows());

  std::vector<std::string> names{"(Intercept)"};
  std::vector<Eigen::VectorXd> blocks;
  for (const auto& term : spec.terms) {
    const auto& col = d.column(term.column);
    if (term.kind == TermKind::Numeric) {
      const auto values = col.to_doubles();
      blocks.emplace_back(Eigen::Map<const Eigen::VectorXd>(values.data(), n));
      names.push_back(term.column);
      continue;
    }
    const auto& cat = col.as_categorical();
    const auto levels = resolved_levels(col, term);
    // Map column codes to positions in the resolved order.
    std::vector<std::ptrdiff_t> position(cat.levels.size(), -1);
    for (std::size_t i = 0; i < cat.levels.size(); ++i) {
      auto it = std::find(levels.begin(), levels.end(), cat.levels[i]);
      if (it != levels.end()) position[i] = it - levels.begin();
    }
    std::vector<Eigen::Index> dummy_of(levels.size(), -1);
    for (std::size_t l = 0; l < levels.size(); ++l) {
      if (levels[l] == term.reference) continue;
      dummy_of[l] = static_cast<Eigen::Index>(blocks.size());
      blocks.emplace_back(Eigen::VectorXd::Zero(n));
      names.push_back(indicator_name(term.column, levels[l]));
    }
    for (Eigen::Index r = 0; r < n; ++r) {
      const auto code = cat.codes[static_cast<std::size_t>(r)];
      if (position[code] < 0)
        throw DataError("unknown level '" + cat.levels[code] + "' in column '" + term.column +
                        "'");
      const auto target = dummy_of[static_cast<std::size_t>(position[code])];
      if (target >= 0) blocks[static_cast<std::size_t>(target)](r) = 1.0;
    }
  }

  DesignMatrix dm;
  dm.x.resize(n, static_cast<Eigen::Index>(blocks.size() + 1));
  dm.x.col(0).setOnes();
  for (std::size_t j = 0; j < blocks.size(); ++j)
    dm.x.col(static_cast<Eigen::Index>(j + 1)) = blocks[j];
  const auto& resp = d.column(spec.response).as_binary().values;
  dm.y.resize(n);
  for (Eigen::Index r = 0; r < n; ++r) dm.y(r) = resp[static_cast<std::size_t>(r)];
  dm.column_names = std::move(names);
  dm.row_ids.assign(d.row_ids().begin(), d.row_ids().end());
  return dm;
}

}  // namespace psm
