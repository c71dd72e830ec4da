#include "lps/operators.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

namespace lps {

namespace {

// FFTW's planner is not thread-safe; plans are created once per shape under a
// lock and executed through the new-array interface, which is.
class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(std::size_t nx, std::size_t ny, int sign) {
    const std::lock_guard lock(mutex_);
    const auto key = std::make_tuple(nx, ny, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    // Column-major nx x ny is row-major ny x nx.
    std::vector<Complex> in(nx * ny), out(nx * ny);
    fftw_plan plan = fftw_plan_dft_2d(
        static_cast<int>(ny), static_cast<int>(nx), reinterpret_cast<fftw_complex*>(in.data()),
        reinterpret_cast<fftw_complex*>(out.data()), sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (plan == nullptr) throw NumericalError("FFTW failed to create a plan");
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::tuple<std::size_t, std::size_t, int>, fftw_plan> plans_;
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

// Centered mask position -> unshifted FFT index (ifftshift).
std::size_t frequency_index(std::size_t pos, std::size_t nx, std::size_t ny) {
  const std::size_t x = pos % nx;
  const std::size_t y = pos / nx;
  const std::size_t kx = (x + nx - nx / 2) % nx;
  const std::size_t ky = (y + ny - ny / 2) % ny;
  return kx + nx * ky;
}

void check_mask(const SamplingMask& mask, const Dims& dims) {
  if (mask.nx() != dims.nx || mask.ny() != dims.ny)
    throw ValidationError("mask is " + std::to_string(mask.nx()) + "x" +
                          std::to_string(mask.ny()) + ", volume slices are " +
                          std::to_string(dims.nx) + "x" + std::to_string(dims.ny));
  if (mask.layers() != 1 && mask.layers() != dims.nz)
    throw ValidationError("mask has " + std::to_string(mask.layers()) +
                          " layers; expected 1 or n_z = " + std::to_string(dims.nz));
}

}  // namespace

void KSpaceData::validate() const {
  if (dims.nx == 0 || dims.ny == 0 || dims.nz == 0)
    throw ValidationError("k-space dims must be positive");
  check_mask(mask, dims);
  if (static_cast<std::size_t>(samples.rows()) != mask.count() ||
      static_cast<std::size_t>(samples.cols()) != dims.nz)
    throw ValidationError("k-space samples are " + std::to_string(samples.rows()) + "x" +
                          std::to_string(samples.cols()) + ", mask/dims require " +
                          std::to_string(mask.count()) + "x" + std::to_string(dims.nz));
}

CMatrix acquire_matrix(const CMatrix& x, const SamplingMask& mask, const Dims& dims) {
  check_mask(mask, dims);
  if (static_cast<std::size_t>(x.rows()) != dims.pixels() ||
      static_cast<std::size_t>(x.cols()) != dims.nz)
    throw ValidationError("acquire: matrix shape does not match dims " + to_string(dims));

  const std::size_t n = dims.pixels();
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  fftw_plan plan = plan_cache().get(dims.nx, dims.ny, FFTW_FORWARD);

  CMatrix out(static_cast<Eigen::Index>(mask.count()), x.cols());
  std::vector<Complex> in(n), spectrum(n);
  for (Eigen::Index z = 0; z < x.cols(); ++z) {
    const auto& positions = mask.sampled_positions(mask.layer_for_slice(static_cast<std::size_t>(z)));
    std::copy_n(x.col(z).data(), n, in.begin());
    fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(in.data()),
                     reinterpret_cast<fftw_complex*>(spectrum.data()));
    for (std::size_t i = 0; i < positions.size(); ++i)
      out(static_cast<Eigen::Index>(i), z) =
          spectrum[frequency_index(positions[i], dims.nx, dims.ny)] * scale;
  }
  return out;
}

CMatrix acquire_adjoint_matrix(const CMatrix& samples, const SamplingMask& mask,
                               const Dims& dims) {
  check_mask(mask, dims);
  if (static_cast<std::size_t>(samples.rows()) != mask.count() ||
      static_cast<std::size_t>(samples.cols()) != dims.nz)
    throw ValidationError("acquire_adjoint: samples shape does not match mask/dims");

  const std::size_t n = dims.pixels();
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  fftw_plan plan = plan_cache().get(dims.nx, dims.ny, FFTW_BACKWARD);

  CMatrix out(static_cast<Eigen::Index>(n), samples.cols());
  std::vector<Complex> spectrum(n), image(n);
  for (Eigen::Index z = 0; z < samples.cols(); ++z) {
    const auto& positions = mask.sampled_positions(mask.layer_for_slice(static_cast<std::size_t>(z)));
    std::fill(spectrum.begin(), spectrum.end(), Complex{});
    for (std::size_t i = 0; i < positions.size(); ++i)
      spectrum[frequency_index(positions[i], dims.nx, dims.ny)] =
          samples(static_cast<Eigen::Index>(i), z);
    fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(spectrum.data()),
                     reinterpret_cast<fftw_complex*>(image.data()));
    for (std::size_t i = 0; i < n; ++i) out(static_cast<Eigen::Index>(i), z) = image[i] * scale;
  }
  return out;
}

KSpaceData acquire(const DynamicVolume& x, const SamplingMask& mask) {
  return KSpaceData{acquire_matrix(x.data(), mask, x.dims()), mask, x.dims()};
}

DynamicVolume acquire_adjoint(const KSpaceData& y) {
  y.validate();
  return DynamicVolume(y.dims, acquire_adjoint_matrix(y.samples, y.mask, y.dims));
}

}  // namespace lps
