#include "kptune/codegen.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

#include "kptune/error.hpp"

namespace kptune {
namespace {

using Values = std::map<std::string, std::string, std::less<>>;

struct FragmentRule {
  std::vector<std::string_view> required;
  std::vector<std::string_view> optional;
};

// Collects placeholder names in order of appearance.
std::vector<std::string> placeholders(std::string_view text, std::string_view fragment) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while ((pos = text.find("${", pos)) != std::string_view::npos) {
    const std::size_t end = text.find('}', pos + 2);
    if (end == std::string_view::npos) {
      throw TemplateError(std::string(fragment) + ": unterminated placeholder");
    }
    out.emplace_back(text.substr(pos + 2, end - pos - 2));
    pos = end + 1;
  }
  return out;
}

void check_fragment(std::string_view text, std::string_view fragment, const FragmentRule& rule) {
  const auto names = placeholders(text, fragment);
  auto count = [&](std::string_view n) { return std::count(names.begin(), names.end(), n); };
  for (const auto& n : names) {
    const bool known = std::find(rule.required.begin(), rule.required.end(), n) != rule.required.end() ||
                       std::find(rule.optional.begin(), rule.optional.end(), n) != rule.optional.end();
    if (!known) throw TemplateError(std::string(fragment) + ": unknown placeholder ${" + n + "}");
    if (count(n) > 1) throw TemplateError(std::string(fragment) + ": placeholder ${" + n + "} repeated");
  }
  for (auto n : rule.required) {
    if (count(n) == 0) {
      throw TemplateError(std::string(fragment) + ": missing placeholder ${" + std::string(n) + "}");
    }
  }
}

std::string substitute(std::string_view text, const Values& values) {
  std::string out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t open = text.find("${", pos);
    if (open == std::string_view::npos) break;
    const std::size_t end = text.find('}', open + 2);
    out.append(text.substr(pos, open - pos));
    out.append(values.find(text.substr(open + 2, end - open - 2))->second);
    pos = end + 1;
  }
  out.append(text.substr(pos));
  return out;
}

const KernelConfig& class_config(int cls, const ConfigSubset& subset, std::span<const KernelConfig> configs) {
  if (cls < 0 || static_cast<std::size_t>(cls) >= subset.config_indices.size()) {
    throw ContractError("leaf class " + std::to_string(cls) + " outside subset of size " +
                        std::to_string(subset.config_indices.size()));
  }
  const std::size_t col = subset.config_indices[static_cast<std::size_t>(cls)];
  if (col >= configs.size()) throw ContractError("subset index " + std::to_string(col) + " outside config list");
  return configs[col];
}

void check_model(const TreeModel& model) {
  if (model.nodes.empty()) throw ContractError("tree model has no nodes");
  for (const auto& n : model.nodes) {
    if (n.is_leaf()) continue;
    const auto size = static_cast<int>(model.nodes.size());
    if (n.feature >= static_cast<int>(kFeatureCount) || n.left <= 0 || n.right <= 0 || n.left >= size ||
        n.right >= size) {
      throw ContractError("tree model has a malformed internal node");
    }
  }
}

void export_node(const TreeModel& model, int idx, int& next_id, std::ostringstream& out) {
  const TreeNode& n = model.nodes[static_cast<std::size_t>(idx)];
  const int id = next_id++;
  if (n.is_leaf()) {
    out << "leaf " << id << " class " << n.label << '\n';
    return;
  }
  // Left subtree ids follow this node directly, so the right id is known only
  // after the left subtree is numbered.
  std::ostringstream left;
  const int left_id = next_id;
  export_node(model, n.left, next_id, left);
  std::ostringstream right;
  const int right_id = next_id;
  export_node(model, n.right, next_id, right);
  out << "node " << id << " feat " << n.feature << " thr " << format_double(n.threshold) << " left " << left_id
      << " right " << right_id << '\n'
      << left.str() << right.str();
}

// Line-oriented reader that tracks the 1-based line number.
class DocReader {
 public:
  explicit DocReader(std::string_view doc) : doc_(doc) {}

  bool next(std::vector<std::string_view>& fields) {
    if (pos_ >= doc_.size()) return false;
    std::size_t end = doc_.find('\n', pos_);
    if (end == std::string_view::npos) end = doc_.size();
    std::string_view line = doc_.substr(pos_, end - pos_);
    pos_ = end + 1;
    ++line_;
    fields.clear();
    std::size_t i = 0;
    while (i < line.size()) {
      if (line[i] == ' ') {
        ++i;
        continue;
      }
      const std::size_t j = std::min(line.find(' ', i), line.size());
      fields.push_back(line.substr(i, j - i));
      i = j;
    }
    return true;
  }

  void expect_line(std::vector<std::string_view>& fields, std::string_view what) {
    if (!next(fields)) throw ParseError(line_ + 1, "unexpected end of document, expected " + std::string(what));
  }

  std::size_t line() const noexcept { return line_; }

 private:
  std::string_view doc_;
  std::size_t pos_ = 0;
  std::size_t line_ = 0;
};

template <typename T>
T parse_number(std::string_view s, std::size_t line, std::string_view what) {
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ParseError(line, "bad " + std::string(what) + " '" + std::string(s) + "'");
  }
  return v;
}

void expect_keyword(const std::vector<std::string_view>& f, std::size_t i, std::string_view kw, std::size_t line) {
  if (i >= f.size() || f[i] != kw) throw ParseError(line, "expected '" + std::string(kw) + "'");
}

}  // namespace

std::string export_model(const TreeModel& model, const ConfigSubset& subset,
                         std::span<const KernelConfig> configs) {
  check_model(model);
  if (subset.config_indices.empty()) throw ContractError("export_model: empty subset");
  for (const auto& n : model.nodes) {
    if (n.is_leaf()) (void)class_config(n.label, subset, configs);
  }

  std::ostringstream out;
  out << kModelDocHeader << '\n' << "features";
  for (auto name : kFeatureNames) out << ' ' << name;
  out << '\n' << "subset " << subset.config_indices.size() << '\n';
  for (std::size_t cls = 0; cls < subset.config_indices.size(); ++cls) {
    const KernelConfig& c = class_config(static_cast<int>(cls), subset, configs);
    out << "config " << c.tile_rows << ' ' << c.tile_acc << ' ' << c.tile_cols << ' ' << c.wg_rows << ' '
        << c.wg_cols << '\n';
  }
  int next_id = 0;
  export_node(model, 0, next_id, out);
  return out.str();
}

ImportedModel import_model(std::string_view doc) {
  DocReader reader(doc);
  std::vector<std::string_view> f;

  reader.expect_line(f, "header");
  if (f.size() != 2 || f[0] != "kptree") throw ParseError(reader.line(), "missing 'kptree' header");
  if (f[1] != "v1") throw ParseError(reader.line(), "unsupported schema version '" + std::string(f[1]) + "'");

  reader.expect_line(f, "features");
  if (f.size() != kFeatureCount + 1 || f[0] != "features") throw ParseError(reader.line(), "bad features line");
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    if (f[i + 1] != kFeatureNames[i]) throw ParseError(reader.line(), "unexpected feature '" + std::string(f[i + 1]) + "'");
  }

  reader.expect_line(f, "subset");
  if (f.size() != 2 || f[0] != "subset") throw ParseError(reader.line(), "bad subset line");
  const auto count = parse_number<std::size_t>(f[1], reader.line(), "subset count");
  if (count == 0) throw ValidationError("line " + std::to_string(reader.line()) + ": empty subset");

  ImportedModel out;
  out.subset.method = "imported";
  out.subset.k_requested = count;
  for (std::size_t c = 0; c < count; ++c) {
    reader.expect_line(f, "config");
    if (f.size() != 6 || f[0] != "config") throw ParseError(reader.line(), "bad config line");
    int v[5];
    for (int i = 0; i < 5; ++i) {
      v[i] = parse_number<int>(f[static_cast<std::size_t>(i) + 1], reader.line(), "config field");
      if (v[i] < 1) throw ParseError(reader.line(), "config fields must be positive");
    }
    out.configs.push_back(KernelConfig{v[0], v[1], v[2], v[3], v[4]});
    out.subset.config_indices.push_back(c);
  }

  std::vector<std::size_t> node_lines;
  while (reader.next(f)) {
    if (f.empty()) throw ParseError(reader.line(), "blank line");
    const std::size_t line = reader.line();
    TreeNode node;
    if (f[0] == "leaf") {
      if (f.size() != 4) throw ParseError(line, "bad leaf line");
      expect_keyword(f, 2, "class", line);
      node.label = parse_number<int>(f[3], line, "class");
    } else if (f[0] == "node") {
      if (f.size() != 10) throw ParseError(line, "bad node line");
      expect_keyword(f, 2, "feat", line);
      expect_keyword(f, 4, "thr", line);
      expect_keyword(f, 6, "left", line);
      expect_keyword(f, 8, "right", line);
      node.feature = parse_number<int>(f[3], line, "feature");
      node.threshold = parse_number<double>(f[5], line, "threshold");
      node.left = parse_number<int>(f[7], line, "child id");
      node.right = parse_number<int>(f[9], line, "child id");
      if (node.feature < 0 || node.feature >= static_cast<int>(kFeatureCount)) {
        throw ValidationError("line " + std::to_string(line) + ": feature index out of range");
      }
      if (!std::isfinite(node.threshold)) {
        throw ValidationError("line " + std::to_string(line) + ": non-finite threshold");
      }
    } else {
      throw ParseError(line, "unknown record '" + std::string(f[0]) + "'");
    }
    const int id = parse_number<int>(f[1], line, "node id");
    if (id != static_cast<int>(out.tree.nodes.size())) {
      throw ParseError(line, "node ids must be consecutive from 0");
    }
    out.tree.nodes.push_back(node);
    node_lines.push_back(line);
  }
  if (out.tree.nodes.empty()) throw ParseError(reader.line() + 1, "unexpected end of document, expected nodes");

  // Every non-root node must be the child of exactly one earlier node.
  const auto n = static_cast<int>(out.tree.nodes.size());
  std::vector<int> parents(out.tree.nodes.size(), 0);
  for (int i = 0; i < n; ++i) {
    const TreeNode& node = out.tree.nodes[static_cast<std::size_t>(i)];
    const std::size_t line = node_lines[static_cast<std::size_t>(i)];
    if (node.is_leaf()) {
      if (node.label < 0 || static_cast<std::size_t>(node.label) >= count) {
        throw ValidationError("line " + std::to_string(line) + ": leaf class " + std::to_string(node.label) +
                              " outside subset of size " + std::to_string(count));
      }
      continue;
    }
    for (int child : {node.left, node.right}) {
      if (child >= n) throw ParseError(reader.line() + 1, "unexpected end of document, missing node " + std::to_string(child));
      if (child <= i) throw ValidationError("line " + std::to_string(line) + ": child id must follow its parent");
      ++parents[static_cast<std::size_t>(child)];
    }
  }
  for (int i = 1; i < n; ++i) {
    if (parents[static_cast<std::size_t>(i)] != 1) {
      throw ValidationError("line " + std::to_string(node_lines[static_cast<std::size_t>(i)]) +
                            ": node is not referenced exactly once");
    }
  }
  return out;
}

EmitTemplate EmitTemplate::c_family() {
  EmitTemplate t;
  t.function_header =
      "// f[0..3] = log2(m), log2(k), log2(n), log2(batch)\n"
      "KernelConfig ${function_name}(const double* f) {";
  t.function_footer = "}";
  t.if_open = "if (f[${feature}] < ${threshold}) {";
  t.else_open = "} else {";
  t.if_close = "}";
  t.leaf_return = "return KernelConfig{${R}, ${A}, ${C}, ${wg_rows}, ${wg_cols}};";
  return t;
}

void EmitTemplate::validate() const {
  check_fragment(function_header, "function_header", {{}, {"function_name"}});
  check_fragment(function_footer, "function_footer", {{}, {"function_name"}});
  check_fragment(if_open, "if_open", {{"feature", "threshold"}, {"feature_name"}});
  check_fragment(else_open, "else_open", {});
  check_fragment(if_close, "if_close", {});
  check_fragment(leaf_return, "leaf_return", {{"R", "A", "C", "wg_rows", "wg_cols"}, {"class"}});
}

std::string emit_nested_if(const TreeModel& model, const ConfigSubset& subset,
                           std::span<const KernelConfig> configs, const EmitTemplate& tmpl) {
  tmpl.validate();
  check_model(model);

  std::string out;
  auto line = [&](int depth, const std::string& text) {
    if (text.empty()) return;
    for (int d = 0; d < depth; ++d) out += tmpl.indent;
    out += text;
    out += '\n';
  };
  const Values fn{{"function_name", tmpl.function_name}};

  auto emit = [&](auto&& self, int idx, int depth) -> void {
    const TreeNode& n = model.nodes[static_cast<std::size_t>(idx)];
    if (n.is_leaf()) {
      const KernelConfig& c = class_config(n.label, subset, configs);
      line(depth, substitute(tmpl.leaf_return, {{"R", std::to_string(c.tile_rows)},
                                                {"A", std::to_string(c.tile_acc)},
                                                {"C", std::to_string(c.tile_cols)},
                                                {"wg_rows", std::to_string(c.wg_rows)},
                                                {"wg_cols", std::to_string(c.wg_cols)},
                                                {"class", std::to_string(n.label)}}));
      return;
    }
    line(depth, substitute(tmpl.if_open,
                           {{"feature", std::to_string(n.feature)},
                            {"feature_name", std::string(kFeatureNames[static_cast<std::size_t>(n.feature)])},
                            {"threshold", format_double(n.threshold)}}));
    self(self, n.left, depth + 1);
    line(depth, tmpl.else_open);
    self(self, n.right, depth + 1);
    line(depth, tmpl.if_close);
  };

  if (!tmpl.function_header.empty()) out += substitute(tmpl.function_header, fn) + '\n';
  emit(emit, 0, 1);
  if (!tmpl.function_footer.empty()) out += substitute(tmpl.function_footer, fn) + '\n';
  return out;
}

}  // namespace kptune
