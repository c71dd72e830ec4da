#include "lps/operators.hpp"

#include "binary_io.hpp"
#include "random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace lps {

SamplingMask::SamplingMask(std::size_t nx, std::size_t ny, std::vector<std::uint8_t> pattern,
                           std::size_t layers)
    : nx_(nx), ny_(ny), layers_(layers), pattern_(std::move(pattern)) {
  if (nx_ == 0 || ny_ == 0 || layers_ == 0)
    throw ValidationError("mask dimensions must be positive");
  const std::size_t plane = nx_ * ny_;
  if (pattern_.size() != plane * layers_)
    throw ValidationError("mask pattern has " + std::to_string(pattern_.size()) +
                          " entries, expected " + std::to_string(plane * layers_));
  positions_.resize(layers_);
  for (std::size_t l = 0; l < layers_; ++l) {
    for (std::size_t i = 0; i < plane; ++i) {
      const auto v = pattern_[l * plane + i];
      if (v > 1) throw ValidationError("mask entries must be 0 or 1");
      if (v) positions_[l].push_back(i);
    }
    if (positions_[l].size() != positions_[0].size())
      throw ValidationError("mask layers sample different numbers of points");
  }
  count_ = positions_[0].size();
  if (count_ == 0) throw ValidationError("mask samples no k-space points");
}

SamplingMask SamplingMask::full(std::size_t nx, std::size_t ny) {
  return SamplingMask(nx, ny, std::vector<std::uint8_t>(nx * ny, 1));
}

SamplingMask make_mask(std::size_t nx, std::size_t ny, double rate, double density_falloff,
                       std::uint64_t seed, std::size_t layers) {
  if (nx == 0 || ny == 0 || layers == 0) throw ValidationError("mask dimensions must be positive");
  if (!(rate > 0.0 && rate <= 1.0)) throw ValidationError("sampling rate must lie in (0, 1]");
  if (!(density_falloff > 0.0) || !std::isfinite(density_falloff))
    throw ValidationError("density falloff must be > 0");
  const std::size_t total = nx * ny;
  const auto wanted = static_cast<std::size_t>(std::llround(rate * static_cast<double>(total)));
  if (wanted < 1) throw ValidationError("rate * n_x * n_y must round to at least one sample");

  const double cx = static_cast<double>(nx / 2);
  const double cy = static_cast<double>(ny / 2);
  const double d0 = std::hypot(static_cast<double>(nx), static_cast<double>(ny)) / 8.0;
  const std::size_t center = nx / 2 + nx * (ny / 2);

  std::vector<double> weight(total);
  for (std::size_t y = 0; y < ny; ++y)
    for (std::size_t x = 0; x < nx; ++x) {
      const double d = std::hypot(static_cast<double>(x) - cx, static_cast<double>(y) - cy);
      weight[x + nx * y] = std::pow(1.0 + d / d0, -density_falloff);
    }

  // Weighted sampling without replacement (exponential-key method): keep the
  // points with the largest log(u)/w.
  std::mt19937_64 rng(seed);
  std::vector<std::uint8_t> pattern(total * layers, 0);
  std::vector<double> key(total);
  std::vector<std::size_t> order(total);
  for (std::size_t l = 0; l < layers; ++l) {
    for (std::size_t i = 0; i < total; ++i) key[i] = std::log(detail::open_unit(rng)) / weight[i];
    key[center] = 0.0;  // above every other key, which are all < 0

    std::iota(order.begin(), order.end(), std::size_t{0});
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(wanted),
                      order.end(), [&](std::size_t a, std::size_t b) {
                        return key[a] != key[b] ? key[a] > key[b] : a < b;
                      });
    for (std::size_t i = 0; i < wanted; ++i) pattern[l * total + order[i]] = 1;
  }
  return SamplingMask(nx, ny, std::move(pattern), layers);
}

void save_mask(const std::filesystem::path& path, const SamplingMask& mask) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  detail::write_header(os, detail::kMaskMagic, Dims{mask.nx(), mask.ny(), mask.layers()});
  os.write(reinterpret_cast<const char*>(mask.pattern().data()),
           static_cast<std::streamsize>(mask.pattern().size()));
  if (!os) throw IoError("write to '" + path.string() + "' failed");
}

SamplingMask load_mask(const std::filesystem::path& path) {
  Dims dims;
  auto is = detail::open_container(path, detail::kMaskMagic, dims);
  const std::size_t n = dims.elements();
  detail::require_payload(is, path, n);
  std::vector<std::uint8_t> pattern(n);
  is.read(reinterpret_cast<char*>(pattern.data()), static_cast<std::streamsize>(n));
  if (is.gcount() != static_cast<std::streamsize>(n))
    throw TruncationError("'" + path.string() + "': short read of mask payload");
  if (is.peek() != std::char_traits<char>::eof())
    throw FormatError("'" + path.string() + "': trailing bytes after payload");
  try {
    return SamplingMask(dims.nx, dims.ny, std::move(pattern), dims.nz);
  } catch (const ValidationError& e) {
    throw FormatError("'" + path.string() + "': " + e.what());
  }
}

}  // namespace lps
