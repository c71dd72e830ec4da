#include "lps/operators.hpp"

#include <array>
#include <cmath>

namespace lps {

namespace {

// Daubechies-4 (two vanishing moments) scaling filter.
const std::array<double, 4>& lowpass() {
  static const std::array<double, 4> h = [] {
    const double s3 = std::sqrt(3.0);
    const double d = 4.0 * std::sqrt(2.0);
    return std::array<double, 4>{(1 + s3) / d, (3 + s3) / d, (3 - s3) / d, (1 - s3) / d};
  }();
  return h;
}

// Quadrature mirror: g_k = (-1)^k h_{3-k}.
const std::array<double, 4>& highpass() {
  static const std::array<double, 4> g = [] {
    const auto& h = lowpass();
    return std::array<double, 4>{h[3], -h[2], h[1], -h[0]};
  }();
  return g;
}

// One periodic analysis step on `n` strided samples; approximation goes to
// the first n/2 outputs, detail to the second half.
void analyze(Complex* data, std::size_t n, std::size_t stride, std::vector<Complex>& tmp) {
  const auto& h = lowpass();
  const auto& g = highpass();
  tmp.assign(n, Complex{});
  const std::size_t half = n / 2;
  for (std::size_t i = 0; i < half; ++i) {
    Complex a{}, d{};
    for (std::size_t k = 0; k < 4; ++k) {
      const Complex v = data[((2 * i + k) % n) * stride];
      a += h[k] * v;
      d += g[k] * v;
    }
    tmp[i] = a;
    tmp[half + i] = d;
  }
  for (std::size_t i = 0; i < n; ++i) data[i * stride] = tmp[i];
}

void synthesize(Complex* data, std::size_t n, std::size_t stride, std::vector<Complex>& tmp) {
  const auto& h = lowpass();
  const auto& g = highpass();
  tmp.assign(n, Complex{});
  const std::size_t half = n / 2;
  for (std::size_t i = 0; i < half; ++i) {
    const Complex a = data[i * stride];
    const Complex d = data[(half + i) * stride];
    for (std::size_t k = 0; k < 4; ++k) tmp[(2 * i + k) % n] += h[k] * a + g[k] * d;
  }
  for (std::size_t i = 0; i < n; ++i) data[i * stride] = tmp[i];
}

void check_dims(const CMatrix& m, const Dims& dims) {
  constexpr std::size_t block = std::size_t{1} << kWaveletLevels;
  if (dims.nx % block != 0 || dims.ny % block != 0 || dims.nx == 0 || dims.ny == 0)
    throw ValidationError("wavelet transform needs n_x and n_y divisible by " +
                          std::to_string(block) + " (" + std::to_string(kWaveletLevels) +
                          " levels), got " + to_string(dims));
  if (static_cast<std::size_t>(m.rows()) != dims.pixels() ||
      static_cast<std::size_t>(m.cols()) != dims.nz)
    throw ValidationError("wavelet transform: matrix shape does not match dims " +
                          to_string(dims));
}

}  // namespace

CMatrix wavelet_forward(const CMatrix& s, const Dims& dims) {
  check_dims(s, dims);
  CMatrix w = s;
  std::vector<Complex> tmp;
  for (Eigen::Index z = 0; z < w.cols(); ++z) {
    Complex* slice = w.col(z).data();
    std::size_t nx = dims.nx, ny = dims.ny;
    for (int level = 0; level < kWaveletLevels; ++level) {
      for (std::size_t y = 0; y < ny; ++y) analyze(slice + dims.nx * y, nx, 1, tmp);
      for (std::size_t x = 0; x < nx; ++x) analyze(slice + x, ny, dims.nx, tmp);
      nx /= 2;
      ny /= 2;
    }
  }
  return w;
}

CMatrix wavelet_inverse(const CMatrix& w, const Dims& dims) {
  check_dims(w, dims);
  CMatrix s = w;
  std::vector<Complex> tmp;
  for (Eigen::Index z = 0; z < s.cols(); ++z) {
    Complex* slice = s.col(z).data();
    for (int level = kWaveletLevels - 1; level >= 0; --level) {
      const std::size_t nx = dims.nx >> level;
      const std::size_t ny = dims.ny >> level;
      for (std::size_t x = 0; x < nx; ++x) synthesize(slice + x, ny, dims.nx, tmp);
      for (std::size_t y = 0; y < ny; ++y) synthesize(slice + dims.nx * y, nx, 1, tmp);
    }
  }
  return s;
}

CMatrix wavelet_forward(const DynamicVolume& s) { return wavelet_forward(s.data(), s.dims()); }

DynamicVolume wavelet_inverse_volume(const CMatrix& w, const Dims& dims) {
  return DynamicVolume(dims, wavelet_inverse(w, dims));
}

}  // namespace lps
