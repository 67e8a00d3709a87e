#include "doctest.h"

#include <algorithm>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "rebalance/dataset.hpp"
#include "rebalance/errors.hpp"
#include "rebalance/rng.hpp"
#include "rebalance/synth.hpp"

using namespace rebalance;

namespace {

const char* kSmallKeel = R"(@relation toy
@attribute width real [0.0, 10.0]
@attribute color {red, green, blue}
@attribute height integer [0, 5]
@attribute class {neg, pos}
@inputs width, color, height
@outputs class
@data
1.5, red, 3, pos
2.5, green, 1, pos
0.5, blue, 4, neg
3.25, red, 0, pos
)";

BinaryDataset parse_small() {
  std::istringstream in(kSmallKeel);
  return parse_keel(in);
}

ParseError::Kind kind_of(const std::string& text) {
  std::istringstream in(text);
  try {
    parse_keel(in);
  } catch (const ParseError& e) {
    return e.kind();
  }
  FAIL("expected a ParseError");
  return ParseError::Kind::malformed_header;
}

}  // namespace

TEST_CASE("KEEL parse fills schema, values, and class roles") {
  BinaryDataset ds = parse_small();
  CHECK(ds.relation == "toy");
  CHECK(ds.n_rows() == 4);
  CHECK(ds.n_features() == 3);
  REQUIRE(ds.attributes.size() == 3);
  CHECK(ds.attributes[0].name == "width");
  CHECK(ds.attributes[0].kind == AttrKind::numeric);
  CHECK(ds.attributes[1].kind == AttrKind::nominal);
  CHECK(ds.attributes[1].nominal_values == std::vector<std::string>{"red", "green", "blue"});
  CHECK(ds.class_attribute == "class");

  // Majority by row count ("pos" has 3 of 4); declared order is preserved.
  CHECK(ds.class_names_declared[0] == "neg");
  CHECK(ds.class_names_declared[1] == "pos");
  CHECK(ds.majority_name == "pos");
  CHECK(ds.minority_name == "neg");
  CHECK(ds.count(ClassTag::majority) == 3);
  CHECK(ds.count(ClassTag::minority) == 1);
  CHECK(ds.labels[2] == ClassTag::minority);

  // Nominal cells become indices into the declared value list.
  CHECK(ds.row(0)[1] == 0.0);  // red
  CHECK(ds.row(1)[1] == 1.0);  // green
  CHECK(ds.row(2)[1] == 2.0);  // blue
  CHECK(ds.row(3)[0] == 3.25);
  CHECK(ds.row(2)[2] == 4.0);
}

TEST_CASE("KEEL serialize then parse reproduces the dataset") {
  BinaryDataset ds = parse_small();
  std::ostringstream out;
  serialize_keel(ds, out);
  std::istringstream in(out.str());
  BinaryDataset back = parse_keel(in);

  CHECK(back.relation == ds.relation);
  CHECK(back.values == ds.values);
  CHECK(back.labels == ds.labels);
  CHECK(back.majority_name == ds.majority_name);
  CHECK(back.minority_name == ds.minority_name);
  REQUIRE(back.attributes.size() == ds.attributes.size());
  for (std::size_t i = 0; i < ds.attributes.size(); ++i) {
    CHECK(back.attributes[i].name == ds.attributes[i].name);
    CHECK(back.attributes[i].kind == ds.attributes[i].kind);
    CHECK(back.attributes[i].nominal_values == ds.attributes[i].nominal_values);
  }
}

TEST_CASE("KEEL parse reports precise failure kinds") {
  CHECK(kind_of("@attribute a real\n@data\n1\n") == ParseError::Kind::malformed_header);
  CHECK(kind_of("@relation r\n@attribute a real\n@attribute c {x, y}\n@data\n"
                "1, x\n2, y\n3\n") == ParseError::Kind::ragged_row);
  CHECK(kind_of("@relation r\n@attribute a real\n@attribute c {x, y}\n@data\n"
                "1, x\n2, z\n") == ParseError::Kind::unknown_nominal_value);
  CHECK(kind_of("@relation r\n@attribute a real\n@attribute c {x, y}\n@data\n"
                "oops, x\n1, y\n") == ParseError::Kind::bad_number);
  CHECK(kind_of("@relation r\n@attribute a real\n@attribute c {x, y}\n@data\n"
                "?, x\n1, y\n") == ParseError::Kind::missing_value);
  CHECK(kind_of("@relation r\n@attribute a real\n@attribute c {x, y, z}\n@data\n"
                "1, x\n2, y\n3, z\n") == ParseError::Kind::non_binary_class);
  CHECK(kind_of("@relation r\n@attribute a real\n@attribute c {x, y}\n@data\n"
                "1, x\n2, x\n") == ParseError::Kind::non_binary_class);
  CHECK(kind_of("@relation r\n@attribute a real\n@attribute a real\n"
                "@attribute c {x, y}\n@data\n1, 2, x\n") == ParseError::Kind::malformed_header);
}

TEST_CASE("parse error carries the offending line number") {
  std::istringstream in("@relation r\n@attribute a real\n@attribute c {x, y}\n@data\n"
                        "1, x\nbad, y\n");
  try {
    parse_keel(in);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.kind() == ParseError::Kind::bad_number);
    CHECK(e.line() == 6);
  }
}

TEST_CASE("CSV parse defaults to the last column as class") {
  std::istringstream in("1.0,2.0,yes\n3.0,4.0,no\n5.0,6.0,yes\n");
  BinaryDataset ds = parse_csv(in);
  CHECK(ds.n_rows() == 3);
  CHECK(ds.n_features() == 2);
  CHECK(ds.majority_name == "yes");
  CHECK(ds.count(ClassTag::minority) == 1);
  CHECK(ds.row(1)[1] == 4.0);
}

TEST_CASE("CSV parse honors an explicit class column") {
  std::istringstream in("yes,1.0\nno,2.0\nyes,3.0\n");
  BinaryDataset ds = parse_csv(in, 0);
  CHECK(ds.n_features() == 1);
  CHECK(ds.majority_name == "yes");
  CHECK(ds.row(2)[0] == 3.0);
}

TEST_CASE("partition_classes returns ascending per-class indices") {
  BinaryDataset ds = parse_small();
  ClassPartition part = partition_classes(ds);
  CHECK(part.majority == std::vector<std::int32_t>{0, 1, 3});
  CHECK(part.minority == std::vector<std::int32_t>{2});
  CHECK(imbalance_ratio(ds) == doctest::Approx(3.0));
}

TEST_CASE("stratified folds balance every class within one row") {
  for (std::uint64_t seed : {1ull, 42ull, 99ull}) {
    BinaryDataset ds = make_blobs(137, 29, 4, seed);
    const int k = 10;
    FoldPlan plan = stratified_folds(ds, k, seed);
    REQUIRE(plan.fold_of.size() == ds.n_rows());
    CHECK(plan.k == k);

    for (ClassTag tag : {ClassTag::majority, ClassTag::minority}) {
      std::vector<int> per_fold(k, 0);
      for (std::size_t i = 0; i < ds.n_rows(); ++i)
        if (ds.labels[i] == tag) per_fold[plan.fold_of[i]]++;
      auto [lo, hi] = std::minmax_element(per_fold.begin(), per_fold.end());
      CHECK(*hi - *lo <= 1);
    }
  }
}

TEST_CASE("stratified folds are deterministic in the seed") {
  BinaryDataset ds = make_blobs(60, 20, 3, 7);
  FoldPlan a = stratified_folds(ds, 5, 1234);
  FoldPlan b = stratified_folds(ds, 5, 1234);
  FoldPlan c = stratified_folds(ds, 5, 1235);
  CHECK(a.fold_of == b.fold_of);
  CHECK(a.fold_of != c.fold_of);
}

TEST_CASE("fold counts outside [2, n] are rejected") {
  BinaryDataset ds = make_blobs(10, 5, 2, 3);
  CHECK_THROWS_AS(stratified_folds(ds, 1, 42), BadFoldCount);
  CHECK_THROWS_AS(stratified_folds(ds, 16, 42), BadFoldCount);
  CHECK_NOTHROW(stratified_folds(ds, 15, 42));
}

TEST_CASE("assemble_subset keeps all minority rows plus the selected majority") {
  BinaryDataset ds = parse_small();
  ClassPartition part = partition_classes(ds);
  SelectionMask mask;
  mask.bits = {1, 0, 1};  // majority rows 0 and 3 stay, row 1 is dropped
  BinaryDataset subset = assemble_subset(ds, part, mask);
  CHECK(subset.n_rows() == 3);
  CHECK(subset.count(ClassTag::minority) == 1);
  CHECK(subset.count(ClassTag::majority) == 2);

  // Rows keep their original relative order: 0, 2, 3.
  CHECK(subset.row(0)[0] == ds.row(0)[0]);
  CHECK(subset.row(1)[0] == ds.row(2)[0]);
  CHECK(subset.row(2)[0] == ds.row(3)[0]);
  CHECK(subset.majority_name == ds.majority_name);
}

TEST_CASE("an all-zero selection is rejected") {
  BinaryDataset ds = parse_small();
  ClassPartition part = partition_classes(ds);
  SelectionMask mask;
  mask.bits = {0, 0, 0};
  CHECK_THROWS_AS(assemble_subset(ds, part, mask), EmptySelection);
  mask.bits = {1, 0, 0};
  CHECK(mask.count() == 1);
  CHECK_NOTHROW(assemble_subset(ds, part, mask));
}

TEST_CASE("select_rows copies the chosen rows with metadata intact") {
  BinaryDataset ds = parse_small();
  std::vector<std::int32_t> rows{3, 2};
  BinaryDataset out = select_rows(ds, rows);
  CHECK(out.n_rows() == 2);
  CHECK(out.row(0)[0] == 3.25);
  CHECK(out.labels[1] == ClassTag::minority);
  CHECK(out.attributes.size() == ds.attributes.size());
  CHECK(out.majority_name == ds.majority_name);
}
