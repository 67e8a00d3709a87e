#include "rebalance/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>

#include "rebalance/rng.hpp"

namespace rebalance {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::vector<std::string> split_commas(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == ',') {
      out.emplace_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  return out;
}

double parse_number(std::string_view cell, int line) {
  std::string_view body = cell;
  if (!body.empty() && body.front() == '+') body.remove_prefix(1);
  double value = 0.0;
  const char* first = body.data();
  const char* last = body.data() + body.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || !std::isfinite(value)) {
    throw ParseError(ParseError::Kind::bad_number, line,
                     "expected finite numeric value, got '" + std::string(cell) + "'");
  }
  return value;
}

void write_double(std::ostream& out, double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.write(buf, ptr - buf);
}

struct RawAttribute {
  AttributeSpec spec;
  bool is_class = false;
  int feature_slot = -1;  // -1: not a feature column
};

}  // namespace

std::size_t BinaryDataset::count(ClassTag tag) const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), tag));
}

std::size_t SelectionMask::count() const {
  std::size_t n = 0;
  for (std::uint8_t b : bits) n += b != 0;
  return n;
}

BinaryDataset parse_keel(std::istream& in) {
  std::vector<RawAttribute> attrs;
  std::string relation;
  bool saw_relation = false;
  bool saw_data = false;
  std::vector<std::string> inputs_decl;
  std::string outputs_decl;

  // Row payloads stay keyed by the raw label string until counts are known.
  std::vector<double> cell_values;  // parsed feature cells, row-major (slot order)
  std::vector<int> row_label;       // index into observed_labels
  std::vector<std::string> observed_labels;

  int class_col = -1;
  std::size_t n_features = 0;
  std::vector<int> col_slot;  // per declared attribute: feature slot or -1

  auto resolve_columns = [&](int line) {
    if (!saw_relation)
      throw ParseError(ParseError::Kind::malformed_header, line, "missing @relation");
    if (attrs.size() < 2)
      throw ParseError(ParseError::Kind::malformed_header, line,
                       "need at least one feature and a class attribute");
    if (!outputs_decl.empty()) {
      auto it = std::find_if(attrs.begin(), attrs.end(),
                             [&](const RawAttribute& a) { return a.spec.name == outputs_decl; });
      if (it == attrs.end())
        throw ParseError(ParseError::Kind::malformed_header, line,
                         "@outputs names unknown attribute '" + outputs_decl + "'");
      class_col = static_cast<int>(it - attrs.begin());
    } else {
      class_col = static_cast<int>(attrs.size()) - 1;
    }
    attrs[class_col].is_class = true;
    if (attrs[class_col].spec.kind != AttrKind::nominal)
      throw ParseError(ParseError::Kind::malformed_header, line,
                       "class attribute must be nominal");

    col_slot.assign(attrs.size(), -1);
    if (!inputs_decl.empty()) {
      int slot = 0;
      for (const auto& name : inputs_decl) {
        auto it = std::find_if(attrs.begin(), attrs.end(),
                               [&](const RawAttribute& a) { return a.spec.name == name; });
        if (it == attrs.end())
          throw ParseError(ParseError::Kind::malformed_header, line,
                           "@inputs names unknown attribute '" + name + "'");
        int col = static_cast<int>(it - attrs.begin());
        if (col == class_col)
          throw ParseError(ParseError::Kind::malformed_header, line,
                           "@inputs lists the class attribute");
        if (col_slot[col] != -1)
          throw ParseError(ParseError::Kind::malformed_header, line,
                           "@inputs repeats attribute '" + name + "'");
        col_slot[col] = slot++;
      }
      n_features = inputs_decl.size();
    } else {
      int slot = 0;
      for (std::size_t c = 0; c < attrs.size(); ++c)
        if (static_cast<int>(c) != class_col) col_slot[c] = slot++;
      n_features = attrs.size() - 1;
    }
  };

  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    std::string_view line = trim(raw);
    if (line.empty() || line.front() == '%') continue;

    if (!saw_data && line.front() == '@') {
      std::size_t sp = line.find_first_of(" \t");
      std::string directive = lower(line.substr(0, sp));
      std::string_view rest = sp == std::string_view::npos ? std::string_view{} : trim(line.substr(sp));

      if (directive == "@relation") {
        if (saw_relation)
          throw ParseError(ParseError::Kind::malformed_header, line_no, "duplicate @relation");
        if (rest.empty())
          throw ParseError(ParseError::Kind::malformed_header, line_no, "@relation needs a name");
        relation = std::string(rest);
        saw_relation = true;
      } else if (directive == "@attribute") {
        std::size_t name_end = rest.find_first_of(" \t{");
        if (name_end == std::string_view::npos || name_end == 0)
          throw ParseError(ParseError::Kind::malformed_header, line_no,
                           "@attribute needs a name and a type");
        RawAttribute attr;
        attr.spec.name = std::string(rest.substr(0, name_end));
        for (const auto& existing : attrs)
          if (existing.spec.name == attr.spec.name)
            throw ParseError(ParseError::Kind::malformed_header, line_no,
                             "duplicate attribute '" + attr.spec.name + "'");
        std::string_view type = trim(rest.substr(name_end));
        if (!type.empty() && type.front() == '{') {
          std::size_t close = type.find('}');
          if (close == std::string_view::npos)
            throw ParseError(ParseError::Kind::malformed_header, line_no,
                             "unterminated nominal value list");
          attr.spec.kind = AttrKind::nominal;
          attr.spec.nominal_values = split_commas(type.substr(1, close - 1));
          if (attr.spec.nominal_values.size() < 2)
            throw ParseError(ParseError::Kind::malformed_header, line_no,
                             "nominal attribute needs at least two values");
        } else {
          std::size_t type_end = type.find_first_of(" \t[");
          std::string kind = lower(type.substr(0, type_end));
          if (kind != "real" && kind != "integer" && kind != "numeric")
            throw ParseError(ParseError::Kind::malformed_header, line_no,
                             "unknown attribute type '" + kind + "'");
          attr.spec.kind = AttrKind::numeric;
          if (type_end != std::string_view::npos) {
            std::string_view range = trim(type.substr(type_end));
            if (!range.empty()) {
              if (range.front() != '[' || range.back() != ']')
                throw ParseError(ParseError::Kind::malformed_header, line_no,
                                 "malformed attribute range");
              auto bounds = split_commas(range.substr(1, range.size() - 2));
              if (bounds.size() != 2)
                throw ParseError(ParseError::Kind::malformed_header, line_no,
                                 "attribute range needs two bounds");
              attr.spec.range = {parse_number(bounds[0], line_no), parse_number(bounds[1], line_no)};
            }
          }
        }
        attrs.push_back(std::move(attr));
      } else if (directive == "@inputs") {
        inputs_decl = split_commas(rest);
      } else if (directive == "@outputs") {
        auto names = split_commas(rest);
        if (names.size() != 1)
          throw ParseError(ParseError::Kind::malformed_header, line_no,
                           "@outputs must name exactly one attribute");
        outputs_decl = names[0];
      } else if (directive == "@data") {
        saw_data = true;
        resolve_columns(line_no);
      } else {
        throw ParseError(ParseError::Kind::malformed_header, line_no,
                         "unknown directive '" + directive + "'");
      }
      continue;
    }

    if (!saw_data)
      throw ParseError(ParseError::Kind::malformed_header, line_no,
                       "data row before @data section");

    auto cells = split_commas(line);
    if (cells.size() != attrs.size())
      throw ParseError(ParseError::Kind::ragged_row, line_no,
                       "expected " + std::to_string(attrs.size()) + " cells, got " +
                           std::to_string(cells.size()));

    std::vector<double> row(n_features, 0.0);
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const std::string& cell = cells[c];
      if (cell == "?" || cell.empty())
        throw ParseError(ParseError::Kind::missing_value, line_no,
                         "missing value in attribute '" + attrs[c].spec.name + "'");
      if (static_cast<int>(c) == class_col) {
        const auto& declared = attrs[c].spec.nominal_values;
        if (std::find(declared.begin(), declared.end(), cell) == declared.end())
          throw ParseError(ParseError::Kind::unknown_nominal_value, line_no,
                           "class value '" + cell + "' not declared");
        auto it = std::find(observed_labels.begin(), observed_labels.end(), cell);
        if (it == observed_labels.end()) {
          observed_labels.push_back(cell);
          row_label.push_back(static_cast<int>(observed_labels.size()) - 1);
        } else {
          row_label.push_back(static_cast<int>(it - observed_labels.begin()));
        }
        continue;
      }
      if (col_slot[c] < 0) continue;  // declared but not an input
      if (attrs[c].spec.kind == AttrKind::nominal) {
        const auto& declared = attrs[c].spec.nominal_values;
        auto it = std::find(declared.begin(), declared.end(), cell);
        if (it == declared.end())
          throw ParseError(ParseError::Kind::unknown_nominal_value, line_no,
                           "value '" + cell + "' not declared for attribute '" +
                               attrs[c].spec.name + "'");
        row[col_slot[c]] = static_cast<double>(it - declared.begin());
      } else {
        row[col_slot[c]] = parse_number(cell, line_no);
      }
    }
    cell_values.insert(cell_values.end(), row.begin(), row.end());
  }

  if (!saw_relation)
    throw ParseError(ParseError::Kind::malformed_header, line_no, "missing @relation");
  if (!saw_data)
    throw ParseError(ParseError::Kind::malformed_header, line_no, "missing @data section");
  if (observed_labels.size() != 2)
    throw ParseError(ParseError::Kind::non_binary_class, line_no,
                     "need exactly two class values in the data, saw " +
                         std::to_string(observed_labels.size()));

  // Order the two observed labels by their position in the declared list.
  const auto& declared = attrs[class_col].spec.nominal_values;
  auto declared_pos = [&](const std::string& name) {
    return std::find(declared.begin(), declared.end(), name) - declared.begin();
  };
  std::array<std::string, 2> names_declared = {observed_labels[0], observed_labels[1]};
  if (declared_pos(names_declared[0]) > declared_pos(names_declared[1]))
    std::swap(names_declared[0], names_declared[1]);

  std::array<std::size_t, 2> counts = {0, 0};
  for (int lbl : row_label) counts[observed_labels[lbl] == names_declared[0] ? 0 : 1]++;

  // Majority by count; equal counts default to the first-declared label.
  int majority_slot = counts[1] > counts[0] ? 1 : 0;

  BinaryDataset ds;
  ds.relation = relation;
  ds.class_attribute = attrs[class_col].spec.name;
  ds.class_names_declared = names_declared;
  ds.majority_name = names_declared[majority_slot];
  ds.minority_name = names_declared[1 - majority_slot];
  for (std::size_t slot = 0; slot < n_features; ++slot) {
    for (std::size_t c = 0; c < attrs.size(); ++c)
      if (col_slot[c] == static_cast<int>(slot)) ds.attributes.push_back(attrs[c].spec);
  }
  ds.values = std::move(cell_values);
  ds.labels.reserve(row_label.size());
  for (int lbl : row_label)
    ds.labels.push_back(observed_labels[lbl] == ds.majority_name ? ClassTag::majority
                                                                 : ClassTag::minority);
  return ds;
}

BinaryDataset parse_keel_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  return parse_keel(in);
}

BinaryDataset parse_csv(std::istream& in, int class_col) {
  std::vector<std::vector<std::string>> rows;
  std::string raw;
  int line_no = 0;
  std::size_t width = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    if (trim(raw).empty()) continue;
    auto cells = split_commas(raw);
    if (width == 0) width = cells.size();
    if (cells.size() != width)
      throw ParseError(ParseError::Kind::ragged_row, line_no,
                       "expected " + std::to_string(width) + " cells, got " +
                           std::to_string(cells.size()));
    if (width < 2)
      throw ParseError(ParseError::Kind::malformed_header, line_no,
                       "need at least one feature column and a class column");
    rows.push_back(std::move(cells));
  }
  if (rows.empty())
    throw ParseError(ParseError::Kind::malformed_header, line_no, "empty input");

  int cls = class_col < 0 ? static_cast<int>(width) - 1 : class_col;
  if (cls >= static_cast<int>(width))
    throw ParseError(ParseError::Kind::malformed_header, 1, "class column out of range");

  BinaryDataset ds;
  ds.relation = "csv";
  ds.class_attribute = "class";
  int slot = 0;
  for (std::size_t c = 0; c < width; ++c) {
    if (static_cast<int>(c) == cls) continue;
    AttributeSpec spec;
    spec.name = "c" + std::to_string(slot++);
    ds.attributes.push_back(std::move(spec));
  }

  std::vector<std::string> observed;
  std::vector<int> row_label;
  line_no = 0;
  for (const auto& cells : rows) {
    ++line_no;
    for (std::size_t c = 0; c < width; ++c) {
      if (static_cast<int>(c) == cls) {
        std::string cell = cells[c];
        if (cell.empty() || cell == "?")
          throw ParseError(ParseError::Kind::missing_value, line_no, "missing class value");
        auto it = std::find(observed.begin(), observed.end(), cell);
        if (it == observed.end()) {
          observed.push_back(cell);
          row_label.push_back(static_cast<int>(observed.size()) - 1);
        } else {
          row_label.push_back(static_cast<int>(it - observed.begin()));
        }
      } else {
        if (cells[c].empty() || cells[c] == "?")
          throw ParseError(ParseError::Kind::missing_value, line_no, "missing value");
        ds.values.push_back(parse_number(cells[c], line_no));
      }
    }
  }
  if (observed.size() != 2)
    throw ParseError(ParseError::Kind::non_binary_class, line_no,
                     "need exactly two class values, saw " + std::to_string(observed.size()));

  std::array<std::size_t, 2> counts = {0, 0};
  for (int lbl : row_label) counts[lbl]++;
  int majority_slot = counts[1] > counts[0] ? 1 : 0;
  ds.class_names_declared = {observed[0], observed[1]};
  ds.majority_name = observed[majority_slot];
  ds.minority_name = observed[1 - majority_slot];
  ds.labels.reserve(row_label.size());
  for (int lbl : row_label)
    ds.labels.push_back(lbl == majority_slot ? ClassTag::majority : ClassTag::minority);
  return ds;
}

void serialize_keel(const BinaryDataset& ds, std::ostream& out) {
  out << "@relation " << ds.relation << "\n";
  for (const auto& attr : ds.attributes) {
    out << "@attribute " << attr.name << " ";
    if (attr.kind == AttrKind::nominal) {
      out << "{";
      for (std::size_t i = 0; i < attr.nominal_values.size(); ++i) {
        if (i) out << ", ";
        out << attr.nominal_values[i];
      }
      out << "}";
    } else {
      out << "real";
      if (attr.range) {
        out << " [";
        write_double(out, attr.range->first);
        out << ", ";
        write_double(out, attr.range->second);
        out << "]";
      }
    }
    out << "\n";
  }
  out << "@attribute " << ds.class_attribute << " {" << ds.class_names_declared[0] << ", "
      << ds.class_names_declared[1] << "}\n";
  out << "@inputs ";
  for (std::size_t i = 0; i < ds.attributes.size(); ++i) {
    if (i) out << ", ";
    out << ds.attributes[i].name;
  }
  out << "\n@outputs " << ds.class_attribute << "\n@data\n";
  for (std::size_t r = 0; r < ds.n_rows(); ++r) {
    auto row = ds.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (ds.attributes[c].kind == AttrKind::nominal) {
        out << ds.attributes[c].nominal_values[static_cast<std::size_t>(row[c])];
      } else {
        write_double(out, row[c]);
      }
      out << ", ";
    }
    out << ds.label_name(ds.labels[r]) << "\n";
  }
}

ClassPartition partition_classes(const BinaryDataset& ds) {
  ClassPartition part;
  for (std::size_t i = 0; i < ds.n_rows(); ++i) {
    auto& dest = ds.labels[i] == ClassTag::majority ? part.majority : part.minority;
    dest.push_back(static_cast<std::int32_t>(i));
  }
  return part;
}

double imbalance_ratio(const BinaryDataset& ds) {
  std::size_t minority = ds.count(ClassTag::minority);
  if (minority == 0) throw EmptyClass("dataset has no minority rows");
  return static_cast<double>(ds.count(ClassTag::majority)) / static_cast<double>(minority);
}

FoldPlan stratified_folds(const BinaryDataset& ds, int k, std::uint64_t seed) {
  if (k < 2 || static_cast<std::size_t>(k) > ds.n_rows())
    throw BadFoldCount("fold count " + std::to_string(k) + " out of range for " +
                       std::to_string(ds.n_rows()) + " rows");
  ClassPartition part = partition_classes(ds);
  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.fold_of.assign(ds.n_rows(), 0);

  Rng rng_min(derive_seed(seed, 0));
  Rng rng_maj(derive_seed(seed, 1));
  auto minority = part.minority;
  auto majority = part.majority;
  rng_min.shuffle(minority);
  rng_maj.shuffle(majority);

  // Deal minority round-robin, then continue the deal through the majority so
  // every fold is nonempty even when one class has fewer rows than folds.
  for (std::size_t i = 0; i < minority.size(); ++i)
    plan.fold_of[minority[i]] = static_cast<std::int32_t>(i % k);
  for (std::size_t i = 0; i < majority.size(); ++i)
    plan.fold_of[majority[i]] = static_cast<std::int32_t>((minority.size() + i) % k);
  return plan;
}

BinaryDataset assemble_subset(const BinaryDataset& ds, const ClassPartition& part,
                              const SelectionMask& mask) {
  if (mask.bits.size() != part.majority.size())
    throw LengthMismatch("mask covers " + std::to_string(mask.bits.size()) +
                         " rows, majority class has " + std::to_string(part.majority.size()));
  if (mask.count() == 0) throw EmptySelection("selection mask has no set bit");

  std::vector<char> keep(ds.n_rows(), 0);
  for (std::int32_t i : part.minority) keep[i] = 1;
  for (std::size_t b = 0; b < mask.bits.size(); ++b)
    if (mask.bits[b]) keep[part.majority[b]] = 1;

  std::vector<std::int32_t> rows;
  rows.reserve(ds.n_rows());
  for (std::size_t i = 0; i < ds.n_rows(); ++i)
    if (keep[i]) rows.push_back(static_cast<std::int32_t>(i));
  return select_rows(ds, rows);
}

BinaryDataset select_rows(const BinaryDataset& ds, std::span<const std::int32_t> rows) {
  BinaryDataset out;
  out.relation = ds.relation;
  out.attributes = ds.attributes;
  out.class_attribute = ds.class_attribute;
  out.class_names_declared = ds.class_names_declared;
  out.majority_name = ds.majority_name;
  out.minority_name = ds.minority_name;
  out.values.reserve(rows.size() * ds.n_features());
  out.labels.reserve(rows.size());
  for (std::int32_t r : rows) {
    if (r < 0 || static_cast<std::size_t>(r) >= ds.n_rows())
      throw Error("row index " + std::to_string(r) + " out of bounds");
    auto row = ds.row(static_cast<std::size_t>(r));
    out.values.insert(out.values.end(), row.begin(), row.end());
    out.labels.push_back(ds.labels[r]);
  }
  return out;
}

}  // namespace rebalance
