#include "oraclefdr/covariance.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "oraclefdr/errors.hpp"
#include "oraclefdr/kernels.hpp"

namespace oraclefdr {
namespace {

constexpr double kSymmetryTol = 1e-10;

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void check_equi_bound(std::size_t size, double rho, const std::string& what) {
  const bool ok_upper = rho < 1.0;
  const bool ok_lower = size < 2 || rho > -1.0 / static_cast<double>(size - 1);
  if (!std::isfinite(rho) || !ok_upper || !ok_lower) {
    throw NumericalError(what + ": rho=" + format_real(rho) + " violates -1/(n-1) < rho < 1 for n=" +
                         std::to_string(size) + " (not positive definite)");
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double parse_real(std::string_view s, std::string_view context) {
  s = trim(s);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ConfigError("bad number '" + std::string(s) + "' in '" + std::string(context) + "'");
  return v;
}

std::size_t parse_size(std::string_view s, std::string_view context) {
  s = trim(s);
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || v == 0)
    throw ConfigError("bad block size '" + std::string(s) + "' in '" + std::string(context) + "'");
  return v;
}

// Sherman-Morrison: ((1-rho) I + rho J)^{-1} = (I - rho/(1+(m-1)rho) J) / (1-rho)
PrecisionMatrix::EquiBlock equi_precision(std::size_t m, double rho) {
  const double scale = 1.0 / (1.0 - rho);
  const double shrink = rho / (1.0 + static_cast<double>(m - 1) * rho);
  return {m, scale * (1.0 - shrink), -scale * shrink};
}

CholeskyFactor::Block equi_factor(std::size_t m, double rho) {
  if (rho > 0.0) return CholeskyFactor::SharedFactorBlock{m, std::sqrt(rho), std::sqrt(1.0 - rho)};
  // (bI + cJ)^2 = b^2 I + (2bc + m c^2) J; solve 2bc + m c^2 = rho for the root
  // with c -> 0 as rho -> 0.
  const double b = std::sqrt(1.0 - rho);
  const double md = static_cast<double>(m);
  const double c = rho / (b + std::sqrt(b * b + md * rho));
  return CholeskyFactor::SymmetricRootBlock{m, b, c};
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::size_t block_size(const CholeskyFactor::Block& b) {
  return std::visit(overloaded{[](const CholeskyFactor::SharedFactorBlock& s) { return s.size; },
                               [](const CholeskyFactor::SymmetricRootBlock& s) { return s.size; },
                               [](const CholeskyFactor::DenseBlock& d) { return d.lower.size(); }},
                    b);
}

std::size_t block_size(const PrecisionMatrix::Block& b) {
  return std::visit(overloaded{[](const PrecisionMatrix::EquiBlock& e) { return e.size; },
                               [](const PrecisionMatrix::DenseBlock& d) { return d.t.size(); }},
                    b);
}

DenseMatrix dense_cholesky(const DenseMatrix& sigma) {
  DenseMatrix lower = sigma;
  if (const std::size_t bad = kernels::cholesky_in_place(lower); bad != 0)
    throw NumericalError("dense covariance is not positive definite: leading minor " +
                         std::to_string(bad) + " failed");
  return lower;
}

}  // namespace

CovarianceSpec CovarianceSpec::identity(std::size_t n) {
  if (n == 0) throw ConfigError("identity covariance needs n >= 1");
  return {IdentityCov{n}, n};
}

CovarianceSpec CovarianceSpec::equicorrelated(std::size_t n, double rho) {
  if (n == 0) throw ConfigError("equicorrelated covariance needs n >= 1");
  check_equi_bound(n, rho, "equicorrelated");
  return {EquicorrelatedCov{n, rho}, n};
}

CovarianceSpec CovarianceSpec::block_diagonal(std::vector<CorrelationBlock> blocks) {
  if (blocks.empty()) throw ConfigError("block-diagonal covariance needs at least one block");
  std::size_t n = 0;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    if (blocks[b].size == 0) throw ConfigError("block " + std::to_string(b) + " has size 0");
    check_equi_bound(blocks[b].size, blocks[b].rho, "block " + std::to_string(b));
    n += blocks[b].size;
  }
  return {BlockDiagonalCov{std::move(blocks)}, n};
}

CovarianceSpec CovarianceSpec::dense(DenseMatrix matrix, std::string source) {
  const std::size_t n = matrix.size();
  if (n == 0) throw ConfigError("dense covariance is empty");
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(matrix(i, i) - 1.0) > kSymmetryTol)
      throw NumericalError("dense covariance must have unit diagonal (entry " + std::to_string(i) +
                           " is " + format_real(matrix(i, i)) + ")");
    for (std::size_t j = 0; j < i; ++j) {
      if (!std::isfinite(matrix(i, j)) || std::abs(matrix(i, j) - matrix(j, i)) > kSymmetryTol)
        throw NumericalError("dense covariance is not symmetric at (" + std::to_string(i) + "," +
                             std::to_string(j) + ")");
    }
  }
  dense_cholesky(matrix);
  return {DenseCov{std::move(matrix), std::move(source)}, n};
}

std::string CovarianceSpec::label() const {
  return std::visit(
      overloaded{[](const IdentityCov&) { return std::string("identity"); },
                 [](const EquicorrelatedCov& e) { return "equi:" + format_real(e.rho); },
                 [](const BlockDiagonalCov& b) {
                   std::string s = "blocks:";
                   for (std::size_t i = 0; i < b.blocks.size(); ++i) {
                     if (i) s += ',';
                     s += std::to_string(b.blocks[i].size) + "@" + format_real(b.blocks[i].rho);
                   }
                   return s;
                 },
                 [](const DenseCov& d) {
                   return "dense:" + (d.source.empty() ? std::string("<inline>") : d.source);
                 }},
      variant_);
}

DenseMatrix read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open matrix file '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    std::vector<double> row;
    std::string_view rest = line;
    while (true) {
      const auto comma = rest.find(',');
      row.push_back(parse_real(rest.substr(0, comma), path));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    rows.push_back(std::move(row));
  }
  const std::size_t n = rows.size();
  if (n == 0) throw ConfigError("matrix file '" + path + "' is empty");
  DenseMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != n)
      throw ConfigError("matrix file '" + path + "' is not square (row " + std::to_string(i + 1) +
                        " has " + std::to_string(rows[i].size()) + " entries)");
    for (std::size_t j = 0; j < n; ++j) m(i, j) = rows[i][j];
  }
  return m;
}

CovarianceSpec parse_covariance(std::string_view text, std::size_t n) {
  const std::string_view t = trim(text);
  auto check_n = [&](const CovarianceSpec& s) {
    if (n != 0 && s.n() != n)
      throw ConfigError("covariance '" + std::string(t) + "' has dimension " + std::to_string(s.n()) +
                        " but n = " + std::to_string(n));
    return s;
  };
  if (t == "identity") {
    if (n == 0) throw ConfigError("identity covariance needs n");
    return CovarianceSpec::identity(n);
  }
  const auto colon = t.find(':');
  if (colon == std::string_view::npos) throw ConfigError("unknown covariance form '" + std::string(t) + "'");
  const std::string_view kind = t.substr(0, colon);
  const std::string_view arg = t.substr(colon + 1);
  if (kind == "equi") {
    if (n == 0) throw ConfigError("equicorrelated covariance needs n");
    return CovarianceSpec::equicorrelated(n, parse_real(arg, t));
  }
  if (kind == "blocks") {
    std::vector<CorrelationBlock> blocks;
    std::string_view rest = arg;
    while (true) {
      const auto comma = rest.find(',');
      const std::string_view item = rest.substr(0, comma);
      const auto at = item.find('@');
      if (at == std::string_view::npos)
        throw ConfigError("block '" + std::string(item) + "' must be SIZE@RHO");
      blocks.push_back({parse_size(item.substr(0, at), t), parse_real(item.substr(at + 1), t)});
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    return check_n(CovarianceSpec::block_diagonal(std::move(blocks)));
  }
  if (kind == "dense") {
    const std::string path(trim(arg));
    return check_n(CovarianceSpec::dense(read_matrix_csv(path), path));
  }
  throw ConfigError("unknown covariance form '" + std::string(t) + "'");
}

DenseMatrix build_covariance(const CovarianceSpec& spec) {
  const std::size_t n = spec.n();
  DenseMatrix m(n);
  auto fill_block = [&m](std::size_t off, std::size_t size, double rho) {
    for (std::size_t i = 0; i < size; ++i)
      for (std::size_t j = 0; j < size; ++j) m(off + i, off + j) = (i == j) ? 1.0 : rho;
  };
  std::visit(overloaded{[&](const IdentityCov&) { fill_block(0, n, 0.0); },
                        [&](const EquicorrelatedCov& e) { fill_block(0, n, e.rho); },
                        [&](const BlockDiagonalCov& b) {
                          std::size_t off = 0;
                          for (const auto& blk : b.blocks) {
                            fill_block(off, blk.size, blk.rho);
                            off += blk.size;
                          }
                        },
                        [&](const DenseCov& d) { m = d.matrix; }},
             spec.variant());
  return m;
}

// ---------------------------------------------------------------------------
// CholeskyFactor

CholeskyFactor::CholeskyFactor(std::vector<Block> blocks) : blocks_(std::move(blocks)) {
  for (const auto& b : blocks_) {
    const std::size_t s = block_size(b);
    n_ += s;
    num_normals_ += std::holds_alternative<SharedFactorBlock>(b) ? s + 1 : s;
  }
}

void CholeskyFactor::apply(std::span<const double> normals, std::span<double> x) const {
  if (normals.size() != num_normals_ || x.size() != n_)
    throw InvalidArgument("CholeskyFactor::apply: dimension mismatch");
  std::size_t in = 0;
  std::size_t out = 0;
  for (const auto& b : blocks_) {
    std::visit(overloaded{[&](const SharedFactorBlock& s) {
                            const double shared = s.common * normals[in++];
                            for (std::size_t i = 0; i < s.size; ++i)
                              x[out++] = shared + s.idiosyncratic * normals[in++];
                          },
                          [&](const SymmetricRootBlock& s) {
                            double sum = 0.0;
                            for (std::size_t i = 0; i < s.size; ++i) sum += normals[in + i];
                            for (std::size_t i = 0; i < s.size; ++i)
                              x[out++] = s.diag * normals[in++] + s.all * sum;
                          },
                          [&](const DenseBlock& d) {
                            const std::size_t m = d.lower.size();
                            kernels::parallel::lower_matvec(d.lower, normals.subspan(in, m),
                                                            x.subspan(out, m));
                            in += m;
                            out += m;
                          }},
               b);
  }
}

DenseMatrix CholeskyFactor::implied_covariance() const {
  DenseMatrix sigma(n_);
  std::size_t off = 0;
  for (const auto& b : blocks_) {
    std::visit(
        overloaded{[&](const SharedFactorBlock& s) {
                     for (std::size_t i = 0; i < s.size; ++i)
                       for (std::size_t j = 0; j < s.size; ++j)
                         sigma(off + i, off + j) =
                             s.common * s.common + (i == j ? s.idiosyncratic * s.idiosyncratic : 0.0);
                   },
                   [&](const SymmetricRootBlock& s) {
                     // (bI + cJ)(bI + cJ) = b^2 I + (2bc + m c^2) J
                     const double md = static_cast<double>(s.size);
                     const double cross = 2.0 * s.diag * s.all + md * s.all * s.all;
                     for (std::size_t i = 0; i < s.size; ++i)
                       for (std::size_t j = 0; j < s.size; ++j)
                         sigma(off + i, off + j) = cross + (i == j ? s.diag * s.diag : 0.0);
                   },
                   [&](const DenseBlock& d) {
                     const DenseMatrix llt = multiply(d.lower, transpose(d.lower));
                     for (std::size_t i = 0; i < llt.size(); ++i)
                       for (std::size_t j = 0; j < llt.size(); ++j) sigma(off + i, off + j) = llt(i, j);
                   }},
        b);
    off += block_size(b);
  }
  return sigma;
}

CholeskyFactor cholesky(const CovarianceSpec& spec) {
  std::vector<CholeskyFactor::Block> blocks;
  std::visit(overloaded{[&](const IdentityCov& c) { blocks.push_back(equi_factor(c.n, 0.0)); },
                        [&](const EquicorrelatedCov& e) { blocks.push_back(equi_factor(e.n, e.rho)); },
                        [&](const BlockDiagonalCov& b) {
                          for (const auto& blk : b.blocks) blocks.push_back(equi_factor(blk.size, blk.rho));
                        },
                        [&](const DenseCov& d) {
                          blocks.push_back(CholeskyFactor::DenseBlock{dense_cholesky(d.matrix)});
                        }},
             spec.variant());
  return CholeskyFactor(std::move(blocks));
}

// ---------------------------------------------------------------------------
// PrecisionMatrix

PrecisionMatrix::PrecisionMatrix(std::vector<Block> blocks) : blocks_(std::move(blocks)) {
  for (const auto& b : blocks_) {
    offsets_.push_back(n_);
    std::visit(overloaded{[&](const EquiBlock& e) { diag_.insert(diag_.end(), e.size, e.diag); },
                          [&](const DenseBlock& d) {
                            for (std::size_t i = 0; i < d.t.size(); ++i) diag_.push_back(d.t(i, i));
                          }},
               b);
    n_ += block_size(b);
  }
  for (double d : diag_)
    if (!std::isfinite(d)) throw NumericalError("precision matrix has non-finite diagonal");
}

double PrecisionMatrix::entry(std::size_t row, std::size_t col) const {
  if (row >= n_ || col >= n_) throw InvalidArgument("PrecisionMatrix::entry: index out of range");
  auto it = std::upper_bound(offsets_.begin(), offsets_.end(), row);
  const std::size_t b = static_cast<std::size_t>(it - offsets_.begin()) - 1;
  const std::size_t lo = offsets_[b];
  const std::size_t size = block_size(blocks_[b]);
  if (col < lo || col >= lo + size) return 0.0;
  return std::visit(overloaded{[&](const EquiBlock& e) { return row == col ? e.diag : e.off; },
                               [&](const DenseBlock& d) { return d.t(row - lo, col - lo); }},
                    blocks_[b]);
}

void PrecisionMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  if (x.size() != n_ || y.size() != n_) throw InvalidArgument("PrecisionMatrix::multiply: dimension mismatch");
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    const std::size_t lo = offsets_[b];
    std::visit(overloaded{[&](const EquiBlock& e) {
                            double sum = 0.0;
                            for (std::size_t i = 0; i < e.size; ++i) sum += x[lo + i];
                            // t_ii x_i + off * (sum - x_i)
                            const double own = e.diag - e.off;
                            const double shared = e.off * sum;
                            for (std::size_t i = 0; i < e.size; ++i) y[lo + i] = own * x[lo + i] + shared;
                          },
                          [&](const DenseBlock& d) {
                            const std::size_t m = d.t.size();
                            kernels::parallel::matvec(d.t, x.subspan(lo, m), y.subspan(lo, m));
                          }},
               blocks_[b]);
  }
}

void PrecisionMatrix::column_logterm_sums(double k, double p, std::span<double> out) const {
  if (out.size() != n_) throw InvalidArgument("column_logterm_sums: dimension mismatch");
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    const std::size_t lo = offsets_[b];
    std::visit(overloaded{[&](const EquiBlock& e) {
                            const double term = kernels::log_mixture_term(k * k * e.off, p);
                            const double s = static_cast<double>(e.size - 1) * term;
                            std::fill_n(out.begin() + static_cast<std::ptrdiff_t>(lo), e.size, s);
                          },
                          [&](const DenseBlock& d) {
                            kernels::parallel::column_logterm_sums(d.t, k, p, out.subspan(lo, d.t.size()));
                          }},
               blocks_[b]);
  }
}

DenseMatrix PrecisionMatrix::to_dense() const {
  DenseMatrix m(n_);
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    const std::size_t lo = offsets_[b];
    std::visit(overloaded{[&](const EquiBlock& e) {
                            for (std::size_t i = 0; i < e.size; ++i)
                              for (std::size_t j = 0; j < e.size; ++j)
                                m(lo + i, lo + j) = (i == j) ? e.diag : e.off;
                          },
                          [&](const DenseBlock& d) {
                            for (std::size_t i = 0; i < d.t.size(); ++i)
                              for (std::size_t j = 0; j < d.t.size(); ++j) m(lo + i, lo + j) = d.t(i, j);
                          }},
               blocks_[b]);
  }
  return m;
}

PrecisionMatrix precision(const CovarianceSpec& spec) {
  std::vector<PrecisionMatrix::Block> blocks;
  std::visit(overloaded{[&](const IdentityCov& c) { blocks.push_back(equi_precision(c.n, 0.0)); },
                        [&](const EquicorrelatedCov& e) { blocks.push_back(equi_precision(e.n, e.rho)); },
                        [&](const BlockDiagonalCov& b) {
                          for (const auto& blk : b.blocks) blocks.push_back(equi_precision(blk.size, blk.rho));
                        },
                        [&](const DenseCov& d) {
                          DenseMatrix t = kernels::parallel::inverse_from_cholesky(dense_cholesky(d.matrix));
                          const std::size_t m = t.size();
                          for (std::size_t i = 0; i < m; ++i)
                            for (std::size_t j = 0; j < i; ++j) {
                              const double avg = 0.5 * (t(i, j) + t(j, i));
                              t(i, j) = avg;
                              t(j, i) = avg;
                            }
                          for (double v : t.data())
                            if (!std::isfinite(v)) throw NumericalError("dense precision has non-finite entries");
                          blocks.push_back(PrecisionMatrix::DenseBlock{std::move(t)});
                        }},
             spec.variant());
  return PrecisionMatrix(std::move(blocks));
}

}  // namespace oraclefdr
