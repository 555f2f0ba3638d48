#pragma once

// Correlation structures for the two-group model: construction, validation,
// sampling factors and precision matrices.
//
// Structured variants (identity, equicorrelated, block-diagonal) never
// materialize an n x n matrix; only Dense does. Everything here is immutable
// after construction and safe to share across threads.

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "oraclefdr/matrix.hpp"

namespace oraclefdr {

struct IdentityCov {
  std::size_t n = 0;
};

struct EquicorrelatedCov {
  std::size_t n = 0;
  double rho = 0.0;
};

struct CorrelationBlock {
  std::size_t size = 0;
  double rho = 0.0;
};

struct BlockDiagonalCov {
  std::vector<CorrelationBlock> blocks;
};

struct DenseCov {
  DenseMatrix matrix;
  std::string source;  // path it was read from, if any; used in the label
};

class CovarianceSpec {
 public:
  using Variant = std::variant<IdentityCov, EquicorrelatedCov, BlockDiagonalCov, DenseCov>;

  // Each factory validates and throws NumericalError on a PD violation.
  static CovarianceSpec identity(std::size_t n);
  static CovarianceSpec equicorrelated(std::size_t n, double rho);
  static CovarianceSpec block_diagonal(std::vector<CorrelationBlock> blocks);
  static CovarianceSpec dense(DenseMatrix matrix, std::string source = {});

  std::size_t n() const noexcept { return n_; }
  const Variant& variant() const noexcept { return variant_; }

  // Textual form: identity | equi:RHO | blocks:S1@R1,S2@R2,... | dense:PATH.
  // Identity and dense labels carry no n; callers supply it when parsing.
  std::string label() const;

 private:
  CovarianceSpec(Variant v, std::size_t n) : variant_(std::move(v)), n_(n) {}
  Variant variant_;
  std::size_t n_ = 0;
};

// Parses the textual form. `n` is required for identity/equi and checked
// against the derived size for blocks/dense (pass 0 to skip the check).
// Syntax problems raise ConfigError, PD violations NumericalError and an
// unreadable dense CSV IoError.
CovarianceSpec parse_covariance(std::string_view text, std::size_t n);

// Comma-separated rows, no header.
DenseMatrix read_matrix_csv(const std::string& path);

// Realized correlation matrix. Intended for verification at moderate n.
DenseMatrix build_covariance(const CovarianceSpec& spec);

// Sampling map x = M w with M M^T = Sigma.
//
// Equicorrelated blocks with rho > 0 use the shared-factor construction
// x = sqrt(rho) w0 1 + sqrt(1 - rho) w, consuming size + 1 normals. Blocks
// with rho <= 0 use the symmetric square root b I + c J (size normals);
// at rho = 0 that is the identity.
// Dense specs use the lower Cholesky factor.
class CholeskyFactor {
 public:
  struct SharedFactorBlock {
    std::size_t size;
    double common;        // sqrt(rho)
    double idiosyncratic;  // sqrt(1 - rho)
  };
  struct SymmetricRootBlock {
    std::size_t size;
    double diag;  // b
    double all;   // c, added through the block sum
  };
  struct DenseBlock {
    DenseMatrix lower;
  };
  using Block = std::variant<SharedFactorBlock, SymmetricRootBlock, DenseBlock>;

  explicit CholeskyFactor(std::vector<Block> blocks);

  std::size_t n() const noexcept { return n_; }
  // Length of the standard-normal input vector apply() consumes.
  std::size_t num_normals() const noexcept { return num_normals_; }
  const std::vector<Block>& blocks() const noexcept { return blocks_; }

  void apply(std::span<const double> normals, std::span<double> x) const;

  // M M^T, materialized. Verification only.
  DenseMatrix implied_covariance() const;

 private:
  std::vector<Block> blocks_;
  std::size_t n_ = 0;
  std::size_t num_normals_ = 0;
};

CholeskyFactor cholesky(const CovarianceSpec& spec);

// Sigma^{-1}, stored block-diagonally. Equicorrelated blocks keep only their
// diagonal and off-diagonal values.
class PrecisionMatrix {
 public:
  struct EquiBlock {
    std::size_t size;
    double diag;
    double off;
  };
  struct DenseBlock {
    DenseMatrix t;
  };
  using Block = std::variant<EquiBlock, DenseBlock>;

  explicit PrecisionMatrix(std::vector<Block> blocks);

  std::size_t n() const noexcept { return n_; }
  const std::vector<Block>& blocks() const noexcept { return blocks_; }
  std::span<const double> diag() const noexcept { return diag_; }

  double entry(std::size_t row, std::size_t col) const;

  // y = Sigma^{-1} x
  void multiply(std::span<const double> x, std::span<double> y) const;

  // out_i = sum_{j != i} ln(p exp(-k^2 t_{j,i}) + 1 - p). Terms outside the
  // block of i have t = 0 and contribute exactly ln(1) = 0.
  void column_logterm_sums(double k, double p, std::span<double> out) const;

  DenseMatrix to_dense() const;

 private:
  std::vector<Block> blocks_;
  std::vector<double> diag_;
  std::vector<std::size_t> offsets_;
  std::size_t n_ = 0;
};

PrecisionMatrix precision(const CovarianceSpec& spec);

}  // namespace oraclefdr
