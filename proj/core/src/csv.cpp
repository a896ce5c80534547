#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>

#include "kptune/dataset.hpp"
#include "kptune/error.hpp"

namespace kptune {
namespace {

constexpr std::size_t kFieldCount = 10;

template <class T>
bool parse_number(std::string_view field, T& out) {
  if (field.empty()) return false;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  if (*first == '+') ++first;  // from_chars rejects a leading plus
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last;
}

std::array<std::string_view, kFieldCount> split_fields(std::string_view line, std::size_t line_no) {
  std::array<std::string_view, kFieldCount> fields{};
  std::size_t count = 0;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    const std::string_view field =
        line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    if (count == kFieldCount) {
      throw ParseError(line_no, "expected " + std::to_string(kFieldCount) + " fields");
    }
    fields[count++] = field;
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (count != kFieldCount) {
    throw ParseError(line_no, "expected " + std::to_string(kFieldCount) + " fields, got " +
                                  std::to_string(count));
  }
  return fields;
}

}  // namespace

std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc{}) throw Error("format_double: conversion failed");
  return std::string(buf.data(), ptr);
}

PerfMatrix parse_benchmark_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;

  if (!std::getline(in, line)) throw ParseError(1, "missing header row");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kBenchmarkCsvHeader) {
    throw ParseError(line_no, "header must be '" + std::string(kBenchmarkCsvHeader) + "'");
  }

  std::map<ProblemSize, std::size_t> problem_index;
  std::map<KernelConfig, std::size_t> config_index;
  std::vector<ProblemSize> problems;
  std::vector<KernelConfig> configs;
  std::map<std::pair<std::size_t, std::size_t>, double> cells;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) throw ParseError(line_no, "empty row");
    const auto f = split_fields(line, line_no);

    std::array<std::int64_t, 9> ints{};
    for (std::size_t i = 0; i < ints.size(); ++i) {
      if (!parse_number(f[i], ints[i])) {
        throw ParseError(line_no, "field " + std::to_string(i + 1) + " is not an integer: '" +
                                      std::string(f[i]) + "'");
      }
      if (ints[i] < 1) {
        throw ValueError(line_no, "field " + std::to_string(i + 1) + " must be >= 1");
      }
      if (i >= 4 && ints[i] > std::numeric_limits<int>::max()) {
        throw ValueError(line_no, "field " + std::to_string(i + 1) + " is out of range");
      }
    }
    double gflops = 0.0;
    if (!parse_number(f[9], gflops)) {
      throw ParseError(line_no, "gflops is not a number: '" + std::string(f[9]) + "'");
    }
    if (!std::isfinite(gflops) || gflops <= 0.0) {
      throw ValueError(line_no, "gflops must be finite and > 0, got '" + std::string(f[9]) + "'");
    }

    const ProblemSize p{ints[0], ints[1], ints[2], ints[3]};
    const KernelConfig c{static_cast<int>(ints[4]), static_cast<int>(ints[5]),
                         static_cast<int>(ints[6]), static_cast<int>(ints[7]),
                         static_cast<int>(ints[8])};
    auto [pit, p_new] = problem_index.try_emplace(p, problems.size());
    if (p_new) problems.push_back(p);
    auto [cit, c_new] = config_index.try_emplace(c, configs.size());
    if (c_new) configs.push_back(c);

    if (!cells.try_emplace({pit->second, cit->second}, gflops).second) {
      throw ValueError(line_no, "duplicate measurement for " + to_string(p) + " / " + to_string(c));
    }
  }

  if (problems.empty()) throw ParseError(line_no, "no data rows");

  Eigen::MatrixXd values(static_cast<Eigen::Index>(problems.size()),
                         static_cast<Eigen::Index>(configs.size()));
  for (std::size_t i = 0; i < problems.size(); ++i) {
    for (std::size_t j = 0; j < configs.size(); ++j) {
      auto it = cells.find({i, j});
      if (it == cells.end()) {
        throw IncompleteGridError("incomplete grid: no measurement for problem " +
                                  to_string(problems[i]) + " with config " + to_string(configs[j]));
      }
      values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = it->second;
    }
  }
  return PerfMatrix(std::move(problems), std::move(configs), std::move(values));
}

PerfMatrix parse_benchmark_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_benchmark_csv(in);
}

PerfMatrix read_benchmark_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open benchmark file '" + path + "'");
  return parse_benchmark_csv(in);
}

std::string write_benchmark_csv(const PerfMatrix& pm) {
  std::string out(kBenchmarkCsvHeader);
  out += '\n';
  const auto& problems = pm.problems();
  const auto& configs = pm.configs();
  out.reserve(out.size() + problems.size() * configs.size() * 48);
  char buf[32];
  auto put = [&](std::int64_t v, char sep) {
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, res.ptr);
    out += sep;
  };
  for (std::size_t i = 0; i < problems.size(); ++i) {
    const auto& p = problems[i];
    std::string prefix;
    std::swap(prefix, out);
    put(p.m, ',');
    put(p.k, ',');
    put(p.n, ',');
    put(p.batch, ',');
    std::swap(prefix, out);
    for (std::size_t j = 0; j < configs.size(); ++j) {
      const auto& c = configs[j];
      out += prefix;
      put(c.tile_rows, ',');
      put(c.tile_acc, ',');
      put(c.tile_cols, ',');
      put(c.wg_rows, ',');
      put(c.wg_cols, ',');
      out += format_double(pm.value(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
      out += '\n';
    }
  }
  return out;
}

void write_benchmark_csv(std::ostream& out, const PerfMatrix& pm) { out << write_benchmark_csv(pm); }

}  // namespace kptune
