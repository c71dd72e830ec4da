#include "lps/phantom.hpp"

#include "random.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace lps {

void PhantomSpec::validate() const {
  if (dims.nx == 0 || dims.ny == 0 || dims.nz == 0)
    throw ValidationError("phantom dims must be positive");
  if (n_frames == 0) throw ValidationError("phantom needs at least one frame");
  if (background_rank < 1 || background_rank > dims.nz)
    throw ValidationError("background_rank must lie in [1, n_z]");
  if (!(blob_width > 0.0)) throw ValidationError("blob_width must be > 0");
  if (!(motion_step >= 0.0)) throw ValidationError("motion_step must be >= 0");
  if (!(noise_sigma >= 0.0)) throw ValidationError("noise_sigma must be >= 0");
  if (!(drift >= 0.0 && drift < 1.0)) throw ValidationError("drift must lie in [0, 1)");
  if (!std::isfinite(blob_amplitude)) throw ValidationError("blob_amplitude must be finite");
  if (n_blobs > 0) {
    const double margin = 3.0 * blob_width;
    const double room =
        std::min(static_cast<double>(dims.nx), static_cast<double>(dims.ny)) - 1.0 - 2.0 * margin;
    const double travel = motion_step * static_cast<double>(n_frames - 1);
    if (room < 0.0 || travel > room)
      throw ValidationError("blob trajectory leaves the field of view: travel " +
                            std::to_string(travel) + " px, room " + std::to_string(room) + " px");
  }
}

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kBroadBumps = 2;
constexpr int kCompactBumps = 4;

struct Blob {
  std::size_t slice;
  double x0, y0, dx, dy;
  Complex amplitude;
};

// Complex image made of a few broad and a few compact Gaussians under a
// taper that vanishes at the field-of-view border, times a gentle linear
// phase; normalized to unit peak magnitude.
Eigen::VectorXcd background_mode(const Dims& d, std::mt19937_64& rng) {
  const double nx = static_cast<double>(d.nx), ny = static_cast<double>(d.ny);
  Eigen::VectorXcd mode = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(d.pixels()));
  auto add_bumps = [&](int count, double wlo, double whi, double alo, double ahi) {
    for (int g = 0; g < count; ++g) {
      const double cx = detail::uniform(rng, 0.25 * nx, 0.75 * nx);
      const double cy = detail::uniform(rng, 0.25 * ny, 0.75 * ny);
      const double w = detail::uniform(rng, wlo, whi) * std::min(nx, ny);
      const double a = detail::uniform(rng, alo, ahi);
      for (std::size_t y = 0; y < d.ny; ++y)
        for (std::size_t x = 0; x < d.nx; ++x) {
          const double rx = static_cast<double>(x) - cx, ry = static_cast<double>(y) - cy;
          mode[static_cast<Eigen::Index>(x + d.nx * y)] +=
              a * std::exp(-(rx * rx + ry * ry) / (2 * w * w));
        }
    }
  };
  add_bumps(kBroadBumps, 0.12, 0.25, 0.5, 1.0);
  add_bumps(kCompactBumps, 0.03, 0.06, 0.2, 0.5);

  const double px = detail::uniform(rng, -0.5, 0.5) * kTwoPi / nx;
  const double py = detail::uniform(rng, -0.5, 0.5) * kTwoPi / ny;
  for (std::size_t y = 0; y < d.ny; ++y)
    for (std::size_t x = 0; x < d.nx; ++x) {
      const double tx = std::sin(std::numbers::pi * (static_cast<double>(x) + 0.5) / nx);
      const double ty = std::sin(std::numbers::pi * (static_cast<double>(y) + 0.5) / ny);
      mode[static_cast<Eigen::Index>(x + d.nx * y)] *=
          tx * tx * ty * ty *
          std::polar(1.0, px * static_cast<double>(x) + py * static_cast<double>(y));
    }
  return mode / mode.cwiseAbs().maxCoeff();
}

}  // namespace

std::vector<PhantomFrame> generate_phantom(const PhantomSpec& spec) {
  spec.validate();
  const Dims& d = spec.dims;
  const auto rows = static_cast<Eigen::Index>(d.pixels());
  const auto cols = static_cast<Eigen::Index>(d.nz);
  const auto rank = static_cast<Eigen::Index>(spec.background_rank);
  std::mt19937_64 rng(spec.seed);

  CMatrix modes(rows, rank);
  CMatrix mixing(rank, cols);
  Eigen::VectorXd drift_phase(rank);
  for (Eigen::Index k = 0; k < rank; ++k) {
    modes.col(k) = background_mode(d, rng) / static_cast<double>(k + 1);
    for (Eigen::Index z = 0; z < cols; ++z)
      mixing(k, z) = std::polar(detail::uniform(rng, 0.5, 1.0), detail::uniform(rng, -0.3, 0.3));
    drift_phase[k] = detail::uniform(rng, 0.0, kTwoPi);
  }

  std::vector<Blob> blobs;
  const double margin = 3.0 * spec.blob_width;
  const double travel = spec.motion_step * static_cast<double>(spec.n_frames - 1);
  for (std::size_t b = 0; b < spec.n_blobs; ++b) {
    Blob blob{};
    blob.slice = static_cast<std::size_t>(rng() % d.nz);
    const double theta = detail::uniform(rng, 0.0, kTwoPi);
    blob.dx = spec.motion_step * std::cos(theta);
    blob.dy = spec.motion_step * std::sin(theta);
    auto start = [&](double n, double step) {
      const double span = travel * std::abs(step) / std::max(spec.motion_step, 1e-300);
      const double lo = margin + (step < 0 ? span : 0.0);
      const double hi = n - 1.0 - margin - (step > 0 ? span : 0.0);
      return detail::uniform(rng, lo, std::max(lo, hi));
    };
    blob.x0 = start(static_cast<double>(d.nx), blob.dx);
    blob.y0 = start(static_cast<double>(d.ny), blob.dy);
    blob.amplitude = std::polar(spec.blob_amplitude, detail::uniform(rng, -std::numbers::pi, std::numbers::pi));
    blobs.push_back(blob);
  }

  std::vector<PhantomFrame> frames;
  frames.reserve(spec.n_frames);
  for (std::size_t t = 0; t < spec.n_frames; ++t) {
    CMatrix drifted = mixing;
    for (Eigen::Index k = 0; k < rank; ++k)
      drifted.row(k) *= 1.0 + spec.drift * std::sin(kTwoPi * static_cast<double>(t) /
                                                         static_cast<double>(spec.n_frames) +
                                                     drift_phase[k]);
    CMatrix low_rank = modes * drifted;

    CMatrix sparse = CMatrix::Zero(rows, cols);
    const double inv2w2 = 1.0 / (2.0 * spec.blob_width * spec.blob_width);
    for (const auto& blob : blobs) {
      const double cx = blob.x0 + blob.dx * static_cast<double>(t);
      const double cy = blob.y0 + blob.dy * static_cast<double>(t);
      for (std::size_t y = 0; y < d.ny; ++y)
        for (std::size_t x = 0; x < d.nx; ++x) {
          const double rx = static_cast<double>(x) - cx, ry = static_cast<double>(y) - cy;
          const double g = std::exp(-(rx * rx + ry * ry) * inv2w2);
          if (g > 1e-12)
            sparse(static_cast<Eigen::Index>(x + d.nx * y), static_cast<Eigen::Index>(blob.slice)) +=
                blob.amplitude * g;
        }
    }

    CMatrix x = low_rank + sparse;
    if (spec.noise_sigma > 0.0) {
      const double s = spec.noise_sigma / std::sqrt(2.0);
      for (Eigen::Index i = 0; i < x.size(); ++i)
        x.data()[i] += Complex(s * detail::standard_normal(rng), s * detail::standard_normal(rng));
    }
    frames.push_back(PhantomFrame{DynamicVolume(d, std::move(x)), std::move(low_rank), std::move(sparse)});
  }
  return frames;
}

double psnr(const CMatrix& reference, const CMatrix& estimate) {
  if (reference.rows() != estimate.rows() || reference.cols() != estimate.cols())
    throw ValidationError("psnr: shape mismatch");
  const Eigen::MatrixXd ref_mag = reference.cwiseAbs();
  const double peak = ref_mag.size() > 0 ? ref_mag.maxCoeff() : 0.0;
  if (peak == 0.0) throw ValidationError("psnr: reference is all zero");
  const double mse = (ref_mag - estimate.cwiseAbs()).squaredNorm() / static_cast<double>(ref_mag.size());
  if (mse == 0.0) return kPsnrSentinel;
  return 20.0 * std::log10(peak / std::sqrt(mse));
}

double psnr(const DynamicVolume& reference, const DynamicVolume& estimate) {
  if (!(reference.dims() == estimate.dims()))
    throw ValidationError("psnr: volumes are " + to_string(reference.dims()) + " and " +
                          to_string(estimate.dims()));
  return psnr(reference.data(), estimate.data());
}

}  // namespace lps
