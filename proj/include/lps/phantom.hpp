// Synthetic dynamic volumes with a known low-rank background and a sparse,
// moving foreground; the ground truth for every quantitative test.
#pragma once

#include "lps/core.hpp"

#include <cstdint>
#include <vector>

namespace lps {

struct PhantomSpec {
  Dims dims{32, 32, 4};
  std::size_t n_frames = 6;
  std::size_t background_rank = 2;
  std::size_t n_blobs = 3;
  double blob_amplitude = 0.5;
  double blob_width = 2.0;     // Gaussian standard deviation, pixels
  double motion_step = 1.0;    // pixels per frame
  double drift = 0.02;         // relative amplitude drift of background modes
  double noise_sigma = 0.0;
  std::uint64_t seed = 1;

  void validate() const;
};

struct PhantomFrame {
  DynamicVolume x;  // low_rank + sparse + noise
  CMatrix low_rank;
  CMatrix sparse;
};

std::vector<PhantomFrame> generate_phantom(const PhantomSpec& spec);

/// Returned by psnr() when the estimate matches the reference exactly.
inline constexpr double kPsnrSentinel = 300.0;

/// Magnitude PSNR with peak max|reference|.
double psnr(const DynamicVolume& reference, const DynamicVolume& estimate);
double psnr(const CMatrix& reference, const CMatrix& estimate);

}  // namespace lps
