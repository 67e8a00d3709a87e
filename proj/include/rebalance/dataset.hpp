#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "rebalance/errors.hpp"

namespace rebalance {

/// Class role of a row. Roles are assigned by row count at parse time, so all
/// downstream code reasons about majority/minority instead of label strings.
enum class ClassTag : std::uint8_t { majority = 0, minority = 1 };

enum class AttrKind : std::uint8_t { numeric, nominal };

struct AttributeSpec {
  std::string name;
  AttrKind kind = AttrKind::numeric;
  std::vector<std::string> nominal_values;          // empty for numeric
  std::optional<std::pair<double, double>> range;   // declared hint, not enforced
  bool operator==(const AttributeSpec&) const = default;
};

/// In-memory two-class dataset. Feature values are stored row-major as
/// doubles; nominal cells hold the category index within the attribute's
/// declared value list.
class BinaryDataset {
 public:
  std::string relation;
  std::vector<AttributeSpec> attributes;
  std::string class_attribute;
  std::array<std::string, 2> class_names_declared;  // declaration order
  std::string majority_name;
  std::string minority_name;
  std::vector<double> values;     // n_rows * n_features
  std::vector<ClassTag> labels;   // n_rows

  std::size_t n_rows() const { return labels.size(); }
  std::size_t n_features() const { return attributes.size(); }

  std::span<const double> row(std::size_t i) const {
    return {values.data() + i * n_features(), n_features()};
  }

  std::size_t count(ClassTag tag) const;
  const std::string& label_name(ClassTag tag) const {
    return tag == ClassTag::majority ? majority_name : minority_name;
  }

  bool operator==(const BinaryDataset&) const = default;
};

/// Row indices of each class, ascending.
struct ClassPartition {
  std::vector<std::int32_t> majority;
  std::vector<std::int32_t> minority;
};

struct FoldPlan {
  int k = 0;
  std::vector<std::int32_t> fold_of;  // n_rows entries in [0, k)
  std::uint64_t seed = 0;
};

/// Bit mask over the majority rows of a ClassPartition (bits[i] pairs with
/// partition.majority[i]).
struct SelectionMask {
  std::vector<std::uint8_t> bits;
  std::size_t count() const;
};

BinaryDataset parse_keel(std::istream& in);
BinaryDataset parse_keel_file(const std::string& path);

/// Headerless CSV fallback. class_col < 0 selects the last column.
BinaryDataset parse_csv(std::istream& in, int class_col = -1);

void serialize_keel(const BinaryDataset& ds, std::ostream& out);

ClassPartition partition_classes(const BinaryDataset& ds);

/// |majority| / |minority|.
double imbalance_ratio(const BinaryDataset& ds);

/// Seeded stratified assignment; every fold nonempty, per-class counts within
/// one of even. Throws BadFoldCount unless 2 <= k <= n_rows.
FoldPlan stratified_folds(const BinaryDataset& ds, int k, std::uint64_t seed);

/// All minority rows plus masked-in majority rows, original row order.
/// Throws EmptySelection when the mask has no set bit.
BinaryDataset assemble_subset(const BinaryDataset& ds, const ClassPartition& part,
                              const SelectionMask& mask);

/// Copies the given rows (with metadata) into a new dataset.
BinaryDataset select_rows(const BinaryDataset& ds, std::span<const std::int32_t> rows);

}  // namespace rebalance
