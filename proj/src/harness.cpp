#include "oraclefdr/harness.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <istream>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>

#include <omp.h>

#include "oraclefdr/errors.hpp"

namespace oraclefdr {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  while (true) {
    const auto pos = s.find(sep);
    out.push_back(trim(s.substr(0, pos)));
    if (pos == std::string_view::npos) break;
    s.remove_prefix(pos + 1);
  }
  return out;
}

template <class T>
T parse_number(std::string_view s, std::string_view key) {
  s = trim(s);
  T v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw ConfigError("bad value '" + std::string(s) + "' for key '" + std::string(key) + "'");
  return v;
}

// RFC 4180 quoting; block labels contain commas.
std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + '"';
}

std::string format9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

void GridConfig::validate() const {
  if (n == 0) throw ConfigError("n must be positive");
  if (p_grid.empty()) throw ConfigError("p_grid is empty");
  if (sigma_grid.empty()) throw ConfigError("sigma grid is empty");
  if (replicates == 0) throw ConfigError("replicates must be >= 1");
  if (methods.empty()) throw ConfigError("no methods selected");
  for (double p : p_grid)
    if (!(p > 0.0 && p < 1.0)) throw ConfigError("p_grid value " + format9(p) + " is outside (0, 1)");
  if (!(k != 0.0) || !std::isfinite(k)) throw ConfigError("k must be finite and nonzero");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  for (const auto& s : sigma_grid)
    if (s.n() != n) throw ConfigError("covariance '" + s.label() + "' does not have dimension n");
}

std::vector<Method> parse_method_list(std::string_view text) {
  std::vector<Method> methods;
  for (auto name : split(text, ',')) {
    const auto m = parse_method(name);
    if (!m) throw ConfigError("unknown method '" + std::string(name) + "'");
    if (std::find(methods.begin(), methods.end(), *m) == methods.end()) methods.push_back(*m);
  }
  return methods;
}

GridConfig parse_grid_config(std::istream& in) {
  GridConfig cfg;
  std::vector<std::string> sigma_texts;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view s = line;
    if (const auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    const std::string_view key = trim(s.substr(0, eq));
    const std::string_view value = trim(s.substr(eq + 1));
    if (key == "n") {
      cfg.n = parse_number<std::size_t>(value, key);
    } else if (key == "p_grid") {
      cfg.p_grid.clear();
      for (auto item : split(value, ',')) cfg.p_grid.push_back(parse_number<double>(item, key));
    } else if (key == "sigma") {
      sigma_texts.emplace_back(value);
    } else if (key == "sigma_grid") {
      for (auto item : split(value, ';'))
        if (!item.empty()) sigma_texts.emplace_back(item);
    } else if (key == "k") {
      cfg.k = parse_number<double>(value, key);
    } else if (key == "alpha") {
      cfg.alpha = parse_number<double>(value, key);
    } else if (key == "replicates") {
      cfg.replicates = parse_number<std::size_t>(value, key);
    } else if (key == "base_seed") {
      cfg.base_seed = parse_number<std::uint64_t>(value, key);
    } else if (key == "methods") {
      cfg.methods = parse_method_list(value);
    } else {
      throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + std::string(key) + "'");
    }
  }
  // Sigma forms need n, which may appear later in the file.
  for (const auto& t : sigma_texts) cfg.sigma_grid.push_back(parse_covariance(t, cfg.n));
  cfg.validate();
  return cfg;
}

GridConfig load_grid_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  return parse_grid_config(in);
}

GridConfig table_grid(int table) {
  GridConfig cfg;
  for (int i = 1; i <= 10; ++i) cfg.p_grid.push_back(i / 100.0);
  if (table >= 1 && table <= 3) {
    for (int r = 2; r <= 8; ++r) cfg.sigma_grid.push_back(CovarianceSpec::equicorrelated(cfg.n, r / 10.0));
  } else if (table >= 4 && table <= 6) {
    cfg.sigma_grid.push_back(
        CovarianceSpec::block_diagonal({{1250, 0.25}, {1250, 0.5}, {1250, 0.15}, {1250, 0.75}}));
  } else {
    throw ConfigError("table must be 1..6");
  }
  return cfg;
}

std::vector<CellReport> run_cell(const ModelParams& params, std::size_t replicates, const SeedSpec& seeds,
                                 std::span<const Method> methods, std::uint64_t cell_index,
                                 const RunOptions& options) {
  params.validate();
  if (replicates == 0) throw ConfigError("replicates must be >= 1");
  const auto start = std::chrono::steady_clock::now();

  const CholeskyFactor factor = cholesky(params.sigma);
  const bool need_oracle = std::find(methods.begin(), methods.end(), Method::oracle) != methods.end();
  std::optional<OracleContext> ctx;
  if (need_oracle) ctx.emplace(build_context(precision(params.sigma), params.k, params.p));

  const std::size_t num_methods = methods.size();
  std::vector<ConfusionCounts> counts(num_methods * replicates);
  std::mutex observer_lock;

  const auto reps = static_cast<std::ptrdiff_t>(replicates);
  const int threads = options.threads > 0 ? options.threads : omp_get_max_threads();
  bool failed = false;
  std::string failure;
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (std::ptrdiff_t r = 0; r < reps; ++r) {
    try {
      const auto rep = static_cast<std::size_t>(r);
      RandomStream stream(seeds.stream_seed(cell_index, rep));
      const SampleDraw draw = sample_draw(params, factor, stream);
      for (std::size_t m = 0; m < num_methods; ++m) {
        DecisionResult d;
        switch (methods[m]) {
          case Method::oracle: d = oracle_procedure(oracle_statistics(draw.x, *ctx), params.alpha); break;
          case Method::bh: d = bh_procedure(draw.x, params.alpha); break;
          case Method::marginal: d = marginal_procedure(draw.x, params.p, params.k, params.alpha); break;
        }
        counts[m * replicates + rep] = confusion(d, draw.theta);
        if (options.observer) {
          std::lock_guard<std::mutex> g(observer_lock);
          options.observer({cell_index, rep, methods[m], &draw});
        }
      }
    } catch (const std::exception& e) {
#pragma omp critical(oraclefdr_run_cell_failure)
      {
        failed = true;
        failure = e.what();
      }
    }
  }
  if (failed) throw NumericalError(failure);

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::vector<CellReport> rows;
  for (std::size_t m = 0; m < num_methods; ++m) {
    CellReport row;
    row.method = methods[m];
    row.p = params.p;
    row.sigma_label = params.sigma.label();
    row.rates = aggregate(std::span<const ConfusionCounts>(counts).subspan(m * replicates, replicates));
    row.wall_time_seconds = options.record_timing ? wall : 0.0;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<CellReport> run_grid(const GridConfig& config, const RunOptions& options) {
  config.validate();
  const SeedSpec seeds{config.base_seed};
  std::vector<CellReport> rows;
  std::uint64_t cell = 0;
  for (const auto& sigma : config.sigma_grid) {
    for (double p : config.p_grid) {
      ModelParams params{config.n, p, config.k, sigma, config.alpha};
      try {
        auto cell_rows = run_cell(params, config.replicates, seeds, config.methods, cell, options);
        rows.insert(rows.end(), cell_rows.begin(), cell_rows.end());
      } catch (const NumericalError& e) {
        throw NumericalError("cell " + std::to_string(cell) + " (sigma=" + sigma.label() + ", p=" + format9(p) +
                             "): " + e.what());
      }
      ++cell;
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const CellReport& a, const CellReport& b) {
    if (a.sigma_label != b.sigma_label) return a.sigma_label < b.sigma_label;
    if (a.p != b.p) return a.p < b.p;
    return std::string_view(to_string(a.method)) < std::string_view(to_string(b.method));
  });
  return rows;
}

void write_csv(std::ostream& out, std::span<const CellReport> rows) {
  out << kCsvHeader << '\n';
  for (const auto& r : rows) {
    const auto& e = r.rates;
    out << to_string(r.method) << ',' << csv_field(r.sigma_label) << ',' << format9(r.p) << ',' << format9(e.fdr) << ','
        << format9(e.se_fdr) << ',' << format9(e.fnr) << ',' << format9(e.se_fnr) << ',' << format9(e.mfdr)
        << ',' << format9(e.mfnr) << ',' << format9(e.mean_rejections) << ',' << e.replicates << ','
        << format9(r.wall_time_seconds) << '\n';
  }
}

void write_csv_file(const std::string& path, std::span<const CellReport> rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open output '" + path + "' for writing");
  write_csv(out, rows);
  out.flush();
  if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace oraclefdr
