// Helpers shared by the test binaries.
#pragma once

#include "lps/core.hpp"
#include "lps/operators.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

namespace lps::testing {

inline CMatrix random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols,
                             double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  CMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = Complex(n(rng), n(rng));
  return m;
}

inline Complex random_complex(std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  return {n(rng), n(rng)};
}

/// Random 0/1 mask with exactly `count` samples per layer.
inline SamplingMask random_mask(std::mt19937_64& rng, std::size_t nx, std::size_t ny,
                                std::size_t count, std::size_t layers = 1) {
  std::vector<std::uint8_t> pattern(nx * ny * layers, 0);
  std::vector<std::size_t> idx(nx * ny);
  for (std::size_t l = 0; l < layers; ++l) {
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::shuffle(idx.begin(), idx.end(), rng);
    for (std::size_t i = 0; i < count; ++i) pattern[l * nx * ny + idx[i]] = 1;
  }
  return SamplingMask(nx, ny, std::move(pattern), layers);
}

// Brute-force minimizer of f(u) = 0.5|u - x|^2 + lambda |u| over the complex
// plane: a grid search on a square that shrinks around the best point. f is
// convex, so the zoom cannot lose the minimizer. Candidates are compared by
// f(u) - f(c) written in terms of (u - c), which avoids the cancellation that
// would otherwise limit the located point to about sqrt(machine eps).
inline Complex brute_force_prox(Complex x, double lambda) {
  auto gain = [&](Complex u, Complex c) {
    const Complex d = u - c;
    const double quad = 0.5 * (std::conj(d) * (u + c - 2.0 * x)).real();
    const double denom = std::abs(u) + std::abs(c);
    const double lin = denom == 0.0 ? 0.0 : lambda * (std::conj(d) * (u + c)).real() / denom;
    return quad + lin;  // f(u) - f(c)
  };
  Complex center = 0.5 * x;
  double half = std::abs(x) + 1.0;
  constexpr int kGrid = 10;
  for (int level = 0; level < 120 && half > 1e-17; ++level) {
    Complex best = center;
    double best_gain = 0.0;
    for (int i = -kGrid; i <= kGrid; ++i)
      for (int j = -kGrid; j <= kGrid; ++j) {
        const Complex u = center + Complex(half * i / kGrid, half * j / kGrid);
        const double g = gain(u, center);
        if (g < best_gain) {
          best_gain = g;
          best = u;
        }
      }
    // Zero is the kink; it must always be a candidate.
    if (gain(0.0, center) <= best_gain) best = 0.0;
    center = best;
    half *= 0.5;
  }
  return center;
}

inline Complex inner(const CMatrix& a, const CMatrix& b) { return (a.adjoint() * b).trace(); }

/// Fresh scratch directory under the system temp dir.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("lps-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << bytes;
}

}  // namespace lps::testing
