#include "kptune/pipeline.hpp"

#include <fstream>
#include <ostream>
#include <sstream>
#include <system_error>

#include <json.hpp>

#include "kptune/codegen.hpp"
#include "kptune/error.hpp"

namespace kptune {
namespace {

using nlohmann::json;

template <typename T, typename Fn>
json names(const std::vector<T>& items, Fn&& name_of) {
  json out = json::array();
  for (const auto& item : items) out.push_back(std::string(name_of(item)));
  return out;
}

template <typename T, typename Parse>
std::vector<T> parse_names(const json& j, std::string_view key, Parse&& parse) {
  if (!j.is_array()) throw InvalidArgument("config: '" + std::string(key) + "' must be an array");
  std::vector<T> out;
  for (const auto& item : j) out.push_back(parse(item.get<std::string>()));
  return out;
}

std::vector<std::size_t> split_indices(std::string_view field, std::size_t line) {
  std::vector<std::size_t> out;
  std::size_t pos = 0;
  while (pos <= field.size()) {
    const std::size_t end = std::min(field.find(';', pos), field.size());
    const std::string token(field.substr(pos, end - pos));
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(token, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (token.empty() || used != token.size()) throw ParseError(line, "bad config index '" + token + "'");
    out.push_back(static_cast<std::size_t>(v));
    pos = end + 1;
  }
  return out;
}

void emit_models(const std::filesystem::path& dir, NormKind scheme, const GridCell& cell,
                 const std::vector<KernelConfig>& configs) {
  for (const auto& scored : cell.classifiers) {
    if (!scored.tree) continue;
    const std::string stem =
        model_stem(scheme, to_string(cell.method), cell.k, parse_classifier_kind(scored.report.classifier));
    write_file_atomic(dir / (stem + ".kptree"), export_model(*scored.tree, cell.subset, configs));
    EmitTemplate tmpl = EmitTemplate::c_family();
    tmpl.function_name = "select_" + stem;
    write_file_atomic(dir / (stem + ".c"), emit_nested_if(*scored.tree, cell.subset, configs, tmpl));
  }
}

}  // namespace

PipelineConfig PipelineConfig::defaults() {
  PipelineConfig cfg;
  cfg.schemes = all_norm_kinds();
  cfg.methods = all_select_methods();
  for (std::size_t k = 4; k <= 15; ++k) cfg.k_values.push_back(k);
  cfg.classifiers = all_classifier_kinds();
  return cfg;
}

NormScheme PipelineConfig::scheme(NormKind kind) const {
  NormScheme s;
  s.kind = kind;
  s.cutoff = cutoff;
  s.sig_center = sig_center;
  s.sig_steepness = sig_steepness;
  return s;
}

void PipelineConfig::validate() const {
  if (schemes.empty()) throw InvalidArgument("config: at least one scheme is required");
  if (methods.empty()) throw InvalidArgument("config: at least one method is required");
  if (k_values.empty()) throw InvalidArgument("config: at least one k is required");
  for (std::size_t k : k_values) {
    if (k < 1) throw InvalidArgument("config: k values must be >= 1");
  }
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw InvalidArgument("config: test_fraction must be in (0, 1)");
  if (jobs < 1) throw InvalidArgument("config: jobs must be >= 1");
  if (output_dir.empty()) throw InvalidArgument("config: output_dir is empty");
  if (input.empty()) {
    if (synth_problems < 2) throw InvalidArgument("config: synth.problems must be >= 2");
    if (!(synth.peak > 0.0)) throw InvalidArgument("config: synth.peak must be positive");
    if (!(synth.noise_sigma >= 0.0 && synth.noise_sigma < 0.5)) {
      throw InvalidArgument("config: synth.noise_sigma must be in [0, 0.5)");
    }
    if (synth.device_parallelism < 1 || synth.reg_budget < 1) {
      throw InvalidArgument("config: synth.device_parallelism and synth.reg_budget must be positive");
    }
  }
  for (NormKind kind : schemes) scheme(kind).validate();
}

std::string config_to_json(const PipelineConfig& cfg) {
  json j;
  j["input"] = cfg.input;
  j["synth"] = {{"problems", cfg.synth_problems},
                {"device_parallelism", cfg.synth.device_parallelism},
                {"reg_budget", cfg.synth.reg_budget},
                {"peak", cfg.synth.peak},
                {"noise_sigma", cfg.synth.noise_sigma}};
  j["schemes"] = names(cfg.schemes, [](NormKind k) { return to_string(k); });
  j["cutoff"] = cfg.cutoff;
  j["sig_center"] = cfg.sig_center;
  j["sig_steepness"] = cfg.sig_steepness;
  j["methods"] = names(cfg.methods, [](SelectMethod m) { return to_string(m); });
  j["k_values"] = cfg.k_values;
  j["classifiers"] = names(cfg.classifiers, [](ClassifierKind c) { return to_string(c); });
  j["test_fraction"] = cfg.test_fraction;
  j["output_dir"] = cfg.output_dir;
  j["seed"] = cfg.seed;
  j["jobs"] = cfg.jobs;
  return j.dump(2) + "\n";
}

PipelineConfig config_from_json(std::string_view text, const PipelineConfig& base) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidArgument(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw InvalidArgument("config: top level must be an object");

  PipelineConfig cfg = base;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "input") {
        cfg.input = value.get<std::string>();
      } else if (key == "synth") {
        for (const auto& [sk, sv] : value.items()) {
          if (sk == "problems") cfg.synth_problems = sv.get<std::size_t>();
          else if (sk == "device_parallelism") cfg.synth.device_parallelism = sv.get<std::int64_t>();
          else if (sk == "reg_budget") cfg.synth.reg_budget = sv.get<int>();
          else if (sk == "peak") cfg.synth.peak = sv.get<double>();
          else if (sk == "noise_sigma") cfg.synth.noise_sigma = sv.get<double>();
          else throw InvalidArgument("config: unknown key 'synth." + sk + "'");
        }
      } else if (key == "schemes") {
        cfg.schemes = parse_names<NormKind>(value, key, parse_norm_kind);
      } else if (key == "cutoff") {
        cfg.cutoff = value.get<double>();
      } else if (key == "sig_center") {
        cfg.sig_center = value.get<double>();
      } else if (key == "sig_steepness") {
        cfg.sig_steepness = value.get<double>();
      } else if (key == "methods") {
        cfg.methods = parse_names<SelectMethod>(value, key, parse_select_method);
      } else if (key == "k_values") {
        cfg.k_values = value.get<std::vector<std::size_t>>();
      } else if (key == "classifiers") {
        cfg.classifiers = parse_names<ClassifierKind>(value, key, parse_classifier_kind);
      } else if (key == "test_fraction") {
        cfg.test_fraction = value.get<double>();
      } else if (key == "output_dir") {
        cfg.output_dir = value.get<std::string>();
      } else if (key == "seed") {
        cfg.seed = value.get<std::uint64_t>();
      } else if (key == "jobs") {
        cfg.jobs = value.get<int>();
      } else {
        throw InvalidArgument("config: unknown key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("config: ") + e.what());
  }
  return cfg;
}

PerfMatrix load_dataset(const PipelineConfig& cfg) {
  if (!cfg.input.empty()) return read_benchmark_csv(cfg.input);
  SynthModel model = cfg.synth;
  model.seed = cfg.seed;
  const auto problems = sample_problem_sizes(cfg.synth_problems, cfg.seed);
  const auto configs = enumerate_configs(default_tile_set(), default_wg_pairs());
  return synth_generate(model, problems, configs);
}

void write_variance_csv(std::ostream& out, const VarianceReport& report, NormKind scheme) {
  out << "# scheme=" << to_string(scheme) << '\n' << "component,explained,cumulative\n";
  for (std::size_t i = 0; i < report.explained.size(); ++i) {
    out << i + 1 << ',' << format_fraction(report.explained[i]) << ',' << format_fraction(report.cumulative[i])
        << '\n';
  }
}

void write_subsets_csv(std::ostream& out, std::span<const ConfigSubset> subsets) {
  out << "method,k_requested,k_actual,config_indices\n";
  for (const auto& s : subsets) {
    out << s.method << ',' << s.k_requested << ',' << s.k_actual() << ',';
    for (std::size_t i = 0; i < s.config_indices.size(); ++i) out << (i ? ";" : "") << s.config_indices[i];
    out << '\n';
  }
}

std::vector<ConfigSubset> parse_subsets_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line) || (++line_no, line != "method,k_requested,k_actual,config_indices")) {
    throw ParseError(1, "expected header method,k_requested,k_actual,config_indices");
  }
  std::vector<ConfigSubset> out;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
    if (fields.size() != 4) throw ParseError(line_no, "expected 4 fields");
    ConfigSubset s;
    s.method = fields[0];
    (void)parse_select_method(s.method);
    try {
      s.k_requested = std::stoul(fields[1]);
    } catch (const std::exception&) {
      throw ParseError(line_no, "bad k_requested '" + fields[1] + "'");
    }
    s.config_indices = split_indices(fields[3], line_no);
    if (fields[2] != std::to_string(s.k_actual())) throw ParseError(line_no, "k_actual does not match index count");
    out.push_back(std::move(s));
  }
  return out;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + tmp.string() + "' for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) throw Error("write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error("cannot rename '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string model_stem(NormKind scheme, std::string_view method, std::size_t k, ClassifierKind kind) {
  std::ostringstream ss;
  ss << to_string(scheme) << '_' << method << "_k" << k << '_' << to_string(kind);
  return ss.str();
}

int run_pipeline(const PipelineConfig& cfg, std::ostream& log) {
  const std::filesystem::path out_dir(cfg.output_dir);
  std::string stage = "config";
  try {
    cfg.validate();
    std::filesystem::create_directories(out_dir / "models");
    std::filesystem::remove(out_dir / "FAILED");
    write_file_atomic(out_dir / "resolved_config.json", config_to_json(cfg));

    stage = "load";
    const PerfMatrix data = load_dataset(cfg);

    stage = "split";
    const SplitResult parts = split(data, SplitSpec{cfg.test_fraction, cfg.seed});
    write_file_atomic(out_dir / "train.csv", write_benchmark_csv(parts.train));
    write_file_atomic(out_dir / "test.csv", write_benchmark_csv(parts.test));
    log << "data: " << data.rows() << " problems x " << data.cols() << " configs; train " << parts.train.rows()
        << ", test " << parts.test.rows() << '\n';

    std::vector<EvalReport> all_reports;
    for (NormKind kind : cfg.schemes) {
      const NormScheme scheme = cfg.scheme(kind);
      const std::string name(to_string(kind));

      stage = "pca[" + name + "]";
      const Selector selector(normalize(parts.train, scheme));
      if (selector.pca_components() == 0) throw InvalidArgument("PCA needs at least 2 training rows");
      const VarianceReport variance = variance_report(selector.pca());
      std::ostringstream variance_csv;
      write_variance_csv(variance_csv, variance, kind);
      write_file_atomic(out_dir / ("pca_variance_" + name + ".csv"), variance_csv.str());

      stage = "grid[" + name + "]";
      GridSpec spec;
      spec.methods = cfg.methods;
      spec.k_values = cfg.k_values;
      spec.scheme = scheme;
      spec.classifiers = cfg.classifiers;
      spec.seed = cfg.seed;
      spec.jobs = cfg.jobs;
      const std::vector<GridCell> cells = run_grid(selector, parts.train, parts.test, spec);

      stage = "report[" + name + "]";
      std::vector<ConfigSubset> subsets;
      std::vector<EvalReport> reports;
      for (const auto& cell : cells) {
        subsets.push_back(cell.subset);
        for (const auto& c : cell.classifiers) reports.push_back(c.report);
        emit_models(out_dir / "models", kind, cell, data.configs());
      }
      std::ostringstream subsets_csv;
      write_subsets_csv(subsets_csv, subsets);
      write_file_atomic(out_dir / ("subsets_" + name + ".csv"), subsets_csv.str());
      std::ostringstream per_row_csv;
      write_per_row_csv(per_row_csv, reports);
      write_file_atomic(out_dir / ("per_row_" + name + ".csv"), per_row_csv.str());
      all_reports.insert(all_reports.end(), reports.begin(), reports.end());
      log << "scheme " << name << ": " << cells.size() << " cells, " << reports.size() << " reports\n";
    }

    stage = "report";
    std::ostringstream eval_csv;
    write_eval_csv(eval_csv, all_reports);
    write_file_atomic(out_dir / "eval_report.csv", eval_csv.str());
    return kExitOk;
  } catch (const std::exception& e) {
    const int code = dynamic_cast<const DataError*>(&e) != nullptr        ? kExitData
                     : dynamic_cast<const InvalidArgument*>(&e) != nullptr ? kExitUsage
                                                                           : kExitInternal;
    log << "error in stage " << stage << ": " << e.what() << '\n';
    try {
      std::filesystem::create_directories(out_dir);
      write_file_atomic(out_dir / "FAILED", "stage: " + stage + "\nerror: " + e.what() + "\n");
    } catch (const std::exception& marker_error) {
      log << "could not write FAILED marker: " << marker_error.what() << '\n';
    }
    return code;
  }
}

}  // namespace kptune
