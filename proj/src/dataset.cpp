#include "psm/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>

#include "psm/csv.hpp"
#include "psm/errors.hpp"

namespace psm {

std::string_view to_string(ColumnKind kind) {
  switch (kind) {
    case ColumnKind::Numeric: return "numeric";
    case ColumnKind::Categorical: return "categorical";
    case ColumnKind::Binary: return "binary";
  }
  return "unknown";
}

Column::Column(std::string name, Data data) : name_(std::move(name)), data_(std::move(data)) {
  if (const auto* cat = std::get_if<CategoricalColumn>(&data_)) {
    for (auto code : cat->codes) {
      if (code >= cat->levels.size())
        throw DataError("column '" + name_ + "': level code out of range");
    }
    auto sorted = cat->levels;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw DataError("column '" + name_ + "': duplicate level");
  } else if (const auto* bin = std::get_if<BinaryColumn>(&data_)) {
    for (auto v : bin->values) {
      if (v > 1) throw DataError("column '" + name_ + "': binary value other than 0/1");
    }
  }
}

ColumnKind Column::kind() const {
  return static_cast<ColumnKind>(data_.index());
}

std::size_t Column::size() const {
  return std::visit(
      [](const auto& c) -> std::size_t {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, CategoricalColumn>)
          return c.codes.size();
        else
          return c.values.size();
      },
      data_);
}

const NumericColumn& Column::as_numeric() const {
  if (const auto* c = std::get_if<NumericColumn>(&data_)) return *c;
  throw DataError("column '" + name_ + "' is " + std::string(to_string(kind())) +
                  ", expected numeric");
}

const CategoricalColumn& Column::as_categorical() const {
  if (const auto* c = std::get_if<CategoricalColumn>(&data_)) return *c;
  throw DataError("column '" + name_ + "' is " + std::string(to_string(kind())) +
                  ", expected categorical");
}

const BinaryColumn& Column::as_binary() const {
  if (const auto* c = std::get_if<BinaryColumn>(&data_)) return *c;
  throw DataError("column '" + name_ + "' is " + std::string(to_string(kind())) +
                  ", expected binary");
}

std::vector<double> Column::to_doubles() const {
  if (const auto* n = std::get_if<NumericColumn>(&data_)) return n->values;
  const auto& b = as_binary();
  return {b.values.begin(), b.values.end()};
}

Column Column::take(std::span<const std::size_t> indices) const {
  auto pick = [&](const auto& src) {
    std::decay_t<decltype(src)> out;
    out.reserve(indices.size());
    for (auto i : indices) out.push_back(src[i]);
    return out;
  };
  Data out = std::visit(
      [&](const auto& c) -> Data {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, CategoricalColumn>)
          return CategoricalColumn{c.levels, pick(c.codes)};
        else
          return T{pick(c.values)};
      },
      data_);
  return Column(name_, std::move(out));
}

Dataset::Dataset(std::vector<Column> columns, std::vector<std::size_t> row_ids)
    : columns_(std::move(columns)), row_ids_(std::move(row_ids)) {
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i].size() != row_ids_.size())
      throw DataError("column '" + columns_[i].name() + "' has " +
                      std::to_string(columns_[i].size()) + " entries, expected " +
                      std::to_string(row_ids_.size()));
    for (std::size_t j = 0; j < i; ++j) {
      if (columns_[j].name() == columns_[i].name())
        throw DataError("duplicate column '" + columns_[i].name() + "'");
    }
  }
  row_index_.reserve(row_ids_.size());
  for (std::size_t i = 0; i < row_ids_.size(); ++i) {
    if (!row_index_.emplace(row_ids_[i], i).second)
      throw DataError("duplicate row id " + std::to_string(row_ids_[i]));
  }
}

bool Dataset::has_column(std::string_view name) const {
  return std::any_of(columns_.begin(), columns_.end(),
                     [&](const Column& c) { return c.name() == name; });
}

const Column& Dataset::column(std::string_view name) const {
  for (const auto& c : columns_) {
    if (c.name() == name) return c;
  }
  throw DataError("missing column '" + std::string(name) + "'");
}

std::optional<std::size_t> Dataset::index_of(std::size_t row_id) const {
  auto it = row_index_.find(row_id);
  if (it == row_index_.end()) return std::nullopt;
  return it->second;
}

Dataset Dataset::with_column(Column replacement) const {
  auto cols = columns_;
  auto it = std::find_if(cols.begin(), cols.end(),
                         [&](const Column& c) { return c.name() == replacement.name(); });
  if (it != cols.end())
    *it = std::move(replacement);
  else
    cols.push_back(std::move(replacement));
  return Dataset(std::move(cols), row_ids_);
}

Dataset Dataset::select_rows(std::span<const std::size_t> row_ids) const {
  std::vector<std::size_t> positions;
  positions.reserve(row_ids.size());
  for (auto id : row_ids) {
    auto pos = index_of(id);
    if (!pos) throw DataError("row id " + std::to_string(id) + " is not in the dataset");
    positions.push_back(*pos);
  }
  std::vector<Column> cols;
  cols.reserve(columns_.size());
  for (const auto& c : columns_) cols.push_back(c.take(positions));
  return Dataset(std::move(cols), {row_ids.begin(), row_ids.end()});
}

Schema smokeban_schema() {
  return {
      {"smoker", ColumnKind::Categorical},   {"ban", ColumnKind::Categorical},
      {"age", ColumnKind::Numeric},          {"education", ColumnKind::Categorical},
      {"afam", ColumnKind::Categorical},     {"hispanic", ColumnKind::Categorical},
      {"gender", ColumnKind::Categorical},
  };
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

bool is_missing(std::string_view cell) {
  cell = trim(cell);
  return cell.empty() || cell == "NA";
}

std::optional<double> parse_double(std::string_view cell) {
  cell = trim(cell);
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(value))
    return std::nullopt;
  return value;
}

struct ColumnBuilder {
  ColumnSpec spec;
  std::size_t source_index = 0;
  std::vector<double> numeric;
  std::vector<std::uint8_t> binary;
  std::vector<std::string> levels;
  std::unordered_map<std::string, std::uint32_t> level_codes;
  std::vector<std::uint32_t> codes;
};

}  // namespace

LoadReport load_csv(std::istream& in, const Schema& schema) {
  const auto records = csv::read_all(in);
  if (records.empty()) throw DataError("empty file: no header row");
  const auto& header = records.front();

  std::vector<ColumnBuilder> builders;
  for (const auto& spec : schema) {
    auto matches = std::count(header.begin(), header.end(), spec.name);
    if (matches == 0) throw DataError("missing column '" + spec.name + "'");
    if (matches > 1) throw DataError("column '" + spec.name + "' appears more than once");
    ColumnBuilder b;
    b.spec = spec;
    b.source_index = static_cast<std::size_t>(
        std::find(header.begin(), header.end(), spec.name) - header.begin());
    builders.push_back(std::move(b));
  }

  LoadReport report;
  std::vector<std::size_t> row_ids;
  std::vector<std::optional<double>> parsed(builders.size());
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    ++report.rows_read;
    bool drop = false;
    for (std::size_t k = 0; k < builders.size(); ++k) {
      const auto& b = builders[k];
      if (b.source_index >= rec.size() || is_missing(rec[b.source_index])) {
        ++report.empty_cells;
        drop = true;
        continue;
      }
      if (b.spec.kind == ColumnKind::Categorical) continue;
      parsed[k] = parse_double(rec[b.source_index]);
      const bool ok = parsed[k] && (b.spec.kind == ColumnKind::Numeric ||
                                    *parsed[k] == 0.0 || *parsed[k] == 1.0);
      if (!ok) {
        ++report.unparseable_cells;
        drop = true;
      }
    }
    if (drop) {
      ++report.rows_dropped;
      continue;
    }
    row_ids.push_back(r - 1);
    for (std::size_t k = 0; k < builders.size(); ++k) {
      auto& b = builders[k];
      switch (b.spec.kind) {
        case ColumnKind::Numeric: b.numeric.push_back(*parsed[k]); break;
        case ColumnKind::Binary: b.binary.push_back(*parsed[k] == 1.0 ? 1 : 0); break;
        case ColumnKind::Categorical: {
          std::string cell(trim(rec[b.source_index]));
          auto [it, inserted] =
              b.level_codes.emplace(cell, static_cast<std::uint32_t>(b.levels.size()));
          if (inserted) b.levels.push_back(cell);
          b.codes.push_back(it->second);
          break;
        }
      }
    }
  }

  std::vector<Column> columns;
  columns.reserve(builders.size());
  for (auto& b : builders) {
    switch (b.spec.kind) {
      case ColumnKind::Numeric:
        columns.emplace_back(b.spec.name, NumericColumn{std::move(b.numeric)});
        break;
      case ColumnKind::Binary:
        columns.emplace_back(b.spec.name, BinaryColumn{std::move(b.binary)});
        break;
      case ColumnKind::Categorical:
        columns.emplace_back(b.spec.name,
                             CategoricalColumn{std::move(b.levels), std::move(b.codes)});
        break;
    }
  }
  report.dataset = Dataset(std::move(columns), std::move(row_ids));
  return report;
}

LoadReport load_csv(const std::filesystem::path& path, const Schema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return load_csv(in, schema);
}

Dataset recode_treatment(const Dataset& d, std::string_view column,
                         std::string_view treated_level) {
  const auto& src = d.column(column);
  const auto& cat = src.as_categorical();
  if (cat.levels.size() != 2)
    throw DataError("column '" + src.name() + "' has " + std::to_string(cat.levels.size()) +
                    " levels, expected exactly 2");
  auto it = std::find(cat.levels.begin(), cat.levels.end(), treated_level);
  if (it == cat.levels.end())
    throw DataError("level '" + std::string(treated_level) + "' not found in column '" +
                    src.name() + "'");
  const auto treated_code = static_cast<std::uint32_t>(it - cat.levels.begin());
  BinaryColumn out;
  out.values.reserve(cat.codes.size());
  for (auto code : cat.codes) out.values.push_back(code == treated_code ? 1 : 0);
  return d.with_column(Column(src.name(), std::move(out)));
}

std::vector<ColumnSummary> summarize(const Dataset& d) {
  std::vector<ColumnSummary> out;
  for (const auto& col : d.columns()) {
    ColumnSummary s{col.name(), col.kind(), {}, std::nullopt};
    switch (col.kind()) {
      case ColumnKind::Categorical: {
        const auto& cat = col.as_categorical();
        std::vector<std::size_t> counts(cat.levels.size(), 0);
        for (auto code : cat.codes) ++counts[code];
        for (std::size_t i = 0; i < cat.levels.size(); ++i)
          s.counts.push_back({cat.levels[i], counts[i]});
        break;
      }
      case ColumnKind::Binary: {
        const auto& v = col.as_binary().values;
        const auto ones = static_cast<std::size_t>(std::count(v.begin(), v.end(), 1));
        s.counts.push_back({"0", v.size() - ones});
        s.counts.push_back({"1", ones});
        break;
      }
      case ColumnKind::Numeric: {
        const auto& v = col.as_numeric().values;
        if (v.empty()) break;
        NumericSummary n;
        n.n = v.size();
        n.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(n.n);
        auto [lo, hi] = std::minmax_element(v.begin(), v.end());
        n.min = *lo;
        n.max = *hi;
        if (n.n > 1) {
          double ss = 0.0;
          for (double x : v) ss += (x - n.mean) * (x - n.mean);
          n.sd = std::sqrt(ss / static_cast<double>(n.n - 1));
        }
        s.numeric = n;
        break;
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace psm
