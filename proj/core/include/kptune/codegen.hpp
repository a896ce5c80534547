#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kptune/classify.hpp"
#include "kptune/dataset.hpp"
#include "kptune/select.hpp"

namespace kptune {

inline constexpr std::string_view kModelDocHeader = "kptree v1";

/// Canonical text form of a deployable tree:
///
///   kptree v1
///   features log2_m log2_k log2_n log2_batch
///   subset <count>
///   config R A C wgR wgC          (one per class)
///   node <id> feat <f> thr <t> left <id> right <id>
///   leaf <id> class <c>
///
/// Nodes are listed in preorder with ids 0..N-1. Thresholds use the shortest
/// round-trip decimal form. `configs` is the full column list the subset
/// indexes into. Throws ContractError if a leaf class or subset index is out
/// of range.
std::string export_model(const TreeModel& model, const ConfigSubset& subset,
                         std::span<const KernelConfig> configs);

struct ImportedModel {
  TreeModel tree;
  ConfigSubset subset;               // indices 0..count-1 into `configs`
  std::vector<KernelConfig> configs;  // the deployed configs in class order
};

/// Throws ParseError (with line) on malformed or truncated text and
/// ValidationError on structurally valid text that breaks a model invariant.
ImportedModel import_model(std::string_view doc);

/// Text fragments for nested-conditional emission. Placeholders are written
/// `${name}`:
///   function_header / function_footer : optional ${function_name}
///   if_open     : ${feature} and ${threshold}, exactly once each;
///                 optional ${feature_name}
///   leaf_return : ${R} ${A} ${C} ${wg_rows} ${wg_cols}, exactly once each;
///                 optional ${class}
/// Fragments are emitted one per line, prefixed by `indent` repeated to the
/// nesting depth.
struct EmitTemplate {
  std::string function_header;
  std::string function_footer;
  std::string if_open;
  std::string else_open;
  std::string if_close;
  std::string leaf_return;
  std::string indent = "  ";
  std::string function_name = "select_kernel";

  /// C-family profile: `f[i]` holds log2 of (m, k, n, batch).
  static EmitTemplate c_family();
  /// Throws TemplateError on a missing, duplicated or unknown placeholder.
  void validate() const;
};

/// Internal node -> `if (x[f] < t) { left } else { right }` per the template;
/// leaf -> leaf_return with the config fields substituted. The comparison
/// is the same strict-less rule predict_tree uses.
std::string emit_nested_if(const TreeModel& model, const ConfigSubset& subset,
                           std::span<const KernelConfig> configs,
                           const EmitTemplate& tmpl = EmitTemplate::c_family());

}  // namespace kptune
