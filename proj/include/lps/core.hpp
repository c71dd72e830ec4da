// Containers, elementwise proximal operators and the binary volume format
// shared by the low-rank plus sparse reconstruction library.
#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace lps {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad argument, inconsistent shape or out-of-range parameter.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// File exists but is not a well-formed volume/mask container.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Header promises more payload than the file holds.
class TruncationError : public Error {
 public:
  using Error::Error;
};

/// File could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// A file's dimensions differ from what the caller required.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Factorization failure or a non-finite iterate.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

struct Dims {
  std::size_t nx = 0;
  std::size_t ny = 0;
  std::size_t nz = 0;

  std::size_t pixels() const { return nx * ny; }
  std::size_t elements() const { return nx * ny * nz; }
  friend bool operator==(const Dims&, const Dims&) = default;
};

std::string to_string(const Dims& d);

/// One 3D volume at a single time instant in Casorati form: each of the
/// n_z columns is a vectorized n_x x n_y slice (column-major, x fastest).
class DynamicVolume {
 public:
  DynamicVolume() = default;
  /// Zero-filled volume.
  explicit DynamicVolume(Dims dims);
  /// Takes ownership of `data`; validates shape and finiteness.
  DynamicVolume(Dims dims, CMatrix data);

  const Dims& dims() const { return dims_; }
  const CMatrix& data() const { return data_; }
  CMatrix& data() { return data_; }

  /// Slice `z` viewed as an n_x x n_y image.
  Eigen::Map<const CMatrix> slice(std::size_t z) const;

 private:
  Dims dims_;
  CMatrix data_;
};

struct Decomposition {
  CMatrix low_rank;
  CMatrix sparse;

  CMatrix sum() const { return low_rank + sparse; }
};

struct MatrixIndex {
  std::size_t row = 0;
  std::size_t col = 0;
  friend auto operator<=>(const MatrixIndex&, const MatrixIndex&) = default;
};

/// Sorted, duplicate-free set of positions into a transform-domain matrix.
class SupportSet {
 public:
  SupportSet() = default;
  explicit SupportSet(std::vector<MatrixIndex> indices);

  const std::vector<MatrixIndex>& indices() const { return indices_; }
  std::size_t size() const { return indices_.size(); }
  bool empty() const { return indices_.empty(); }
  bool contains(MatrixIndex idx) const;

  /// Throws ValidationError if any index falls outside rows x cols.
  void check_bounds(std::size_t rows, std::size_t cols) const;

  /// |a \ b| + |b \ a|
  static std::size_t symmetric_difference(const SupportSet& a, const SupportSet& b);

 private:
  std::vector<MatrixIndex> indices_;
};

/// Information carried from the previous time instant: the spectrum of its
/// low-rank part and the transform-domain support of its sparse part.
struct Prior {
  RVector sigma_prev;
  SupportSet support_prev;

  void validate() const;
};

enum class ThresholdMode {
  /// lambda_L and lambda_S are used as given.
  kAbsolute,
  /// lambda_L scales sigma_max(X0); lambda_S scales max|T(X0)|. Both are
  /// resolved once from the initial proxy X0 = A^H(y).
  kRelativeToProxy,
};

struct SolverConfig {
  double lambda_L = 0.03;
  double lambda_S = 0.02;
  double lambda_p = 0.5;
  double tol = 1e-3;
  int max_iter = 300;
  double support_eps = 0.02;
  ThresholdMode mode = ThresholdMode::kRelativeToProxy;

  void validate() const;
};

// ---------------------------------------------------------------------------
// Elementwise operators
// ---------------------------------------------------------------------------

/// Complex soft-thresholding (x/|x|) max(|x| - lambda, 0), with 0 -> 0.
Complex soft_threshold(Complex x, double lambda);

CMatrix soft_threshold_matrix(const CMatrix& m, double lambda);

/// Entries listed in `keep` pass through untouched; the rest are shrunk.
CMatrix soft_threshold_restricted(const CMatrix& m, double lambda, const SupportSet& keep);

/// ||x_new - x_old||_F / ||x_old||_F, or ||x_new||_F when x_old is zero.
double relative_change(const CMatrix& x_new, const CMatrix& x_old);

bool all_finite(const CMatrix& m);

// ---------------------------------------------------------------------------
// Binary I/O
// ---------------------------------------------------------------------------

void save_volume(const std::filesystem::path& path, const DynamicVolume& v);
DynamicVolume load_volume(const std::filesystem::path& path);
/// As load_volume, but throws DimensionError unless the header matches `expected`.
DynamicVolume load_volume(const std::filesystem::path& path, const Dims& expected);

}  // namespace lps
