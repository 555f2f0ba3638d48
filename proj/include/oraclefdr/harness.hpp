#pragma once

// Simulation driver: sweeps (p, Sigma) grids, runs seeded replicates for the
// requested procedures on shared draws, aggregates and writes CSV.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "oraclefdr/metrics.hpp"
#include "oraclefdr/model.hpp"

namespace oraclefdr {

struct GridConfig {
  std::size_t n = 5000;
  std::vector<double> p_grid;
  std::vector<CovarianceSpec> sigma_grid;
  double k = 2.5;
  double alpha = 0.05;
  std::size_t replicates = 200;
  std::uint64_t base_seed = 20240101;
  std::vector<Method> methods{Method::oracle, Method::bh, Method::marginal};

  void validate() const;
};

// key = value lines, '#' starts a comment. Keys: n, p_grid (comma list),
// sigma (repeatable) or sigma_grid (';' list), k, alpha, replicates,
// base_seed, methods (comma list). Throws ConfigError.
GridConfig parse_grid_config(std::istream& in);
GridConfig load_grid_config(const std::string& path);

std::vector<Method> parse_method_list(std::string_view text);

// Grid for one of the reproduced tables: 1-3 equicorrelated (rho 0.2..0.8),
// 4-6 four equicorrelated blocks of 1250. Tables in a group share a grid.
GridConfig table_grid(int table);

struct CellReport {
  Method method = Method::oracle;
  double p = 0.0;
  std::string sigma_label;
  ErrorRates rates;
  double wall_time_seconds = 0.0;  // whole cell, shared by its method rows
};

// Called once per (replicate, method) evaluation. Invoked from worker threads
// under a lock.
struct DrawEvent {
  std::uint64_t cell_index;
  std::size_t replicate;
  Method method;
  const SampleDraw* draw;
};

struct RunOptions {
  int threads = 0;  // 0: OpenMP default
  bool record_timing = true;
  std::function<void(const DrawEvent&)> observer;
};

std::vector<CellReport> run_cell(const ModelParams& params, std::size_t replicates, const SeedSpec& seeds,
                                 std::span<const Method> methods, std::uint64_t cell_index,
                                 const RunOptions& options = {});

// Rows sorted by (sigma label, p, method).
std::vector<CellReport> run_grid(const GridConfig& config, const RunOptions& options = {});

inline constexpr const char* kCsvHeader =
    "method,sigma,p,fdr,se_fdr,fnr,se_fnr,mfdr,mfnr,mean_rejections,replicates,wall_time_s";

void write_csv(std::ostream& out, std::span<const CellReport> rows);
// Throws IoError when the path cannot be written.
void write_csv_file(const std::string& path, std::span<const CellReport> rows);

}  // namespace oraclefdr
