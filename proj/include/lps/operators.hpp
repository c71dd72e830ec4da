// Measurement operator (masked per-slice 2D Fourier sampling), the wavelet
// sparsifying transform, spectral operators and sampling-mask generation.
#pragma once

#include "lps/core.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace lps {

/// Boolean k-space pattern on an n_x x n_y grid, stored column-major (x
/// fastest). The grid is centered: the DC frequency sits at (n_x/2, n_y/2).
///
/// A mask holds one layer shared by every slice, or one layer per slice.
/// All layers sample the same number of points so that acquired data is
/// always an m x n_z matrix.
class SamplingMask {
 public:
  SamplingMask() = default;
  SamplingMask(std::size_t nx, std::size_t ny, std::vector<std::uint8_t> pattern,
               std::size_t layers = 1);

  static SamplingMask full(std::size_t nx, std::size_t ny);

  std::size_t nx() const { return nx_; }
  std::size_t ny() const { return ny_; }
  std::size_t layers() const { return layers_; }
  /// Samples per layer (m).
  std::size_t count() const { return count_; }
  double rate() const { return static_cast<double>(count_) / static_cast<double>(nx_ * ny_); }
  bool at(std::size_t x, std::size_t y, std::size_t layer = 0) const {
    return pattern_[x + nx_ * (y + ny_ * layer)] != 0;
  }
  const std::vector<std::uint8_t>& pattern() const { return pattern_; }

  /// Layer used for slice `z`.
  std::size_t layer_for_slice(std::size_t z) const { return layers_ == 1 ? 0 : z; }

  /// In-layer column-major positions of the sampled points, in acquisition order.
  const std::vector<std::size_t>& sampled_positions(std::size_t layer = 0) const {
    return positions_.at(layer);
  }

  friend bool operator==(const SamplingMask& a, const SamplingMask& b) {
    return a.nx_ == b.nx_ && a.ny_ == b.ny_ && a.layers_ == b.layers_ && a.pattern_ == b.pattern_;
  }

 private:
  std::size_t nx_ = 0;
  std::size_t ny_ = 0;
  std::size_t layers_ = 0;
  std::size_t count_ = 0;
  std::vector<std::uint8_t> pattern_;
  std::vector<std::vector<std::size_t>> positions_;
};

struct KSpaceData {
  CMatrix samples;  // m x n_z
  SamplingMask mask;
  Dims dims;

  void validate() const;
};

struct SpectralDecomposition {
  CMatrix U;      // rows x k
  RVector sigma;  // k, descending
  CMatrix V;      // cols x k

  CMatrix reconstruct() const;
  /// U diag(values) V^H with replacement singular values.
  CMatrix reconstruct(const RVector& values) const;
};

/// Default offset d0 in the variable-density weight is the grid diagonal / 8.
inline constexpr double kDefaultDensityFalloff = 2.0;

/// Variable-density mask: per layer, exactly round(rate * n_x * n_y) points
/// drawn without replacement with weight (1 + d/d0)^-falloff, DC always
/// included. Layers are drawn in order from one generator seeded by `seed`.
SamplingMask make_mask(std::size_t nx, std::size_t ny, double rate, double density_falloff,
                       std::uint64_t seed, std::size_t layers = 1);

void save_mask(const std::filesystem::path& path, const SamplingMask& mask);
SamplingMask load_mask(const std::filesystem::path& path);

KSpaceData acquire(const DynamicVolume& x, const SamplingMask& mask);
DynamicVolume acquire_adjoint(const KSpaceData& y);

/// Raw-matrix forms of A and A^H used inside the solvers.
CMatrix acquire_matrix(const CMatrix& x, const SamplingMask& mask, const Dims& dims);
CMatrix acquire_adjoint_matrix(const CMatrix& samples, const SamplingMask& mask, const Dims& dims);

inline constexpr int kWaveletLevels = 3;

/// Per-slice orthogonal 2D Daubechies-4 transform, periodic boundaries,
/// kWaveletLevels levels. Output uses the same Casorati layout as the input;
/// within a slice the coarsest approximation band occupies the top-left
/// (n_x/8) x (n_y/8) corner.
CMatrix wavelet_forward(const CMatrix& s, const Dims& dims);
CMatrix wavelet_inverse(const CMatrix& w, const Dims& dims);
CMatrix wavelet_forward(const DynamicVolume& s);
DynamicVolume wavelet_inverse_volume(const CMatrix& w, const Dims& dims);

/// Thin SVD; requires rows >= cols.
SpectralDecomposition svd(const CMatrix& m);

CMatrix sv_threshold(const CMatrix& m, double lambda);

/// Moves the spectrum of `m` a fraction lambda_p of the way to `sigma_prev`,
/// keeping the singular vectors of `m`. Negative results clamp to 0.
CMatrix apply_sigma_prior(const CMatrix& m, const RVector& sigma_prev, double lambda_p);

/// Singular-value soft-thresholding followed by the spectral prior step,
/// both on the singular vectors of `m`. With lambda_p = 0 this equals
/// sv_threshold(m, lambda).
CMatrix sv_threshold_with_prior(const CMatrix& m, double lambda, const RVector& sigma_prev,
                                double lambda_p);

/// Indices of entries with |w_ij| > support_eps * max|w|.
SupportSet extract_support(const CMatrix& w, double support_eps);

}  // namespace lps
