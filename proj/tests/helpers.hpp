#pragma once

// Hand-built dataset fixtures shared across the test binaries.

#include <cstdint>
#include <string>
#include <vector>

#include "rebalance/dataset.hpp"

namespace rebalance::testing {

/// All-numeric dataset from explicit rows and tags. Attribute names are
/// f0, f1, ...; class names are fixed to maj/min.
inline BinaryDataset numeric_dataset(const std::vector<std::vector<double>>& rows,
                                     const std::vector<ClassTag>& labels) {
  BinaryDataset ds;
  ds.relation = "fixture";
  std::size_t d = rows.empty() ? 0 : rows[0].size();
  for (std::size_t j = 0; j < d; ++j) {
    AttributeSpec spec;
    spec.name = "f" + std::to_string(j);
    spec.kind = AttrKind::numeric;
    ds.attributes.push_back(std::move(spec));
  }
  ds.class_attribute = "class";
  ds.class_names_declared = {"maj", "min"};
  ds.majority_name = "maj";
  ds.minority_name = "min";
  for (const auto& row : rows) ds.values.insert(ds.values.end(), row.begin(), row.end());
  ds.labels = labels;
  return ds;
}

/// Same, but column `col` is nominal with the given value list (cells hold
/// indices into it).
inline BinaryDataset with_nominal(BinaryDataset ds, std::size_t col,
                                  std::vector<std::string> values) {
  ds.attributes[col].kind = AttrKind::nominal;
  ds.attributes[col].nominal_values = std::move(values);
  return ds;
}

inline std::vector<std::int32_t> all_rows(std::size_t n) {
  std::vector<std::int32_t> rows(n);
  for (std::size_t i = 0; i < n; ++i) rows[i] = static_cast<std::int32_t>(i);
  return rows;
}

}  // namespace rebalance::testing
