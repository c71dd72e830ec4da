#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lps/operators.hpp"
#include "lps/phantom.hpp"

#include <algorithm>
#include <cmath>

using namespace lps;

namespace {

double support_change(const CMatrix& prev_sparse, const CMatrix& sparse, const Dims& d,
                      double eps) {
  const auto a = extract_support(wavelet_forward(prev_sparse, d), eps);
  const auto b = extract_support(wavelet_forward(sparse, d), eps);
  return static_cast<double>(SupportSet::symmetric_difference(a, b)) /
         static_cast<double>(std::max<std::size_t>(a.size(), 1));
}

double spectral_distance(const CMatrix& prev, const CMatrix& cur) {
  const RVector s = svd(cur).sigma;
  return (s - svd(prev).sigma).norm() / s.norm();
}

}  // namespace

TEST_CASE("background alone has the requested rank") {
  for (const std::size_t rank : {1u, 2u, 3u}) {
    PhantomSpec spec;
    spec.n_blobs = 0;
    spec.background_rank = rank;
    for (const auto& f : generate_phantom(spec)) {
      const RVector s = svd(f.x.data()).sigma;
      CHECK(s(static_cast<Eigen::Index>(rank) - 1) / s(0) > 1e-3);
      if (rank < 4) CHECK(s(static_cast<Eigen::Index>(rank)) / s(0) < 1e-10);
      CHECK(f.sparse.isZero(0.0));
    }
  }
}

TEST_CASE("static phantom repeats its frames") {
  PhantomSpec spec;
  spec.motion_step = 0.0;
  spec.drift = 0.0;
  const auto frames = generate_phantom(spec);
  REQUIRE(frames.size() == 6);
  for (std::size_t t = 1; t < frames.size(); ++t) {
    CHECK(frames[t].x.data() == frames[0].x.data());
    CHECK(spectral_distance(frames[t - 1].low_rank, frames[t].low_rank) == 0.0);
  }
}

TEST_CASE("phantom structure") {
  PhantomSpec spec;
  const auto a = generate_phantom(spec);
  const auto b = generate_phantom(spec);
  spec.seed = 2;
  const auto c = generate_phantom(spec);
  CHECK(a[3].x.data() == b[3].x.data());
  CHECK_FALSE(a[3].x.data() == c[3].x.data());

  for (const auto& f : a) {
    CHECK(f.x.dims() == Dims{32, 32, 4});
    CHECK((f.x.data() - f.low_rank - f.sparse).norm() < 1e-14);
    const double el = f.low_rank.squaredNorm(), es = f.sparse.squaredNorm();
    CHECK(el > 0.0);
    CHECK(es > 0.0);
    CHECK(es < el);
  }
  // The moving part differs between frames, the background barely does.
  CHECK((a[1].sparse - a[0].sparse).norm() > 0.1 * a[0].sparse.norm());
  CHECK((a[1].low_rank - a[0].low_rank).norm() < 0.1 * a[0].low_rank.norm());
}

TEST_CASE("sparse component is wavelet compressible") {
  PhantomSpec spec;
  for (const auto& f : generate_phantom(spec)) {
    const CMatrix w = wavelet_forward(f.sparse, spec.dims);
    std::vector<double> e(static_cast<std::size_t>(w.size()));
    for (Eigen::Index i = 0; i < w.size(); ++i) e[static_cast<std::size_t>(i)] = std::norm(w.data()[i]);
    std::sort(e.begin(), e.end(), std::greater<>());
    double total = 0, top = 0;
    for (std::size_t i = 0; i < e.size(); ++i) {
      total += e[i];
      if (i < e.size() / 10) top += e[i];
    }
    CHECK(top / total >= 0.95);
  }
}

TEST_CASE("noise is added on top of the components") {
  PhantomSpec spec;
  spec.noise_sigma = 0.01;
  const auto f = generate_phantom(spec).at(0);
  const CMatrix noise = f.x.data() - f.low_rank - f.sparse;
  const double rms = noise.norm() / std::sqrt(static_cast<double>(noise.size()));
  CHECK(rms == doctest::Approx(0.01 * std::sqrt(2.0)).epsilon(0.1));
}

TEST_CASE("default moving phantom: adjacent spectral distance below 0.1") {
  const auto frames = generate_phantom(PhantomSpec{});
  for (std::size_t t = 1; t < frames.size(); ++t) {
    CAPTURE(t);
    CHECK(spectral_distance(frames[t - 1].low_rank, frames[t].low_rank) < 0.1);
  }
}

// A one-pixel shift moves energy between decimated wavelet bands, so the
// thresholded support of the true moving part changes by far more than 15%.
TEST_CASE("default moving phantom: adjacent support change of the true sparse part below 15%") {
  PhantomSpec spec;
  const auto frames = generate_phantom(spec);
  for (std::size_t t = 1; t < frames.size(); ++t) {
    const double change = support_change(frames[t - 1].sparse, frames[t].sparse, spec.dims, 0.02);
    CAPTURE(t);
    CHECK(change < 0.15);
  }
}

TEST_CASE("phantom validation") {
  PhantomSpec spec;
  spec.motion_step = 10.0;
  CHECK_THROWS_AS(generate_phantom(spec), ValidationError);
  spec = {};
  spec.background_rank = 5;
  CHECK_THROWS_AS(generate_phantom(spec), ValidationError);
  spec = {};
  spec.n_frames = 0;
  CHECK_THROWS_AS(generate_phantom(spec), ValidationError);
  spec = {};
  spec.blob_width = 0.0;
  CHECK_THROWS_AS(generate_phantom(spec), ValidationError);
  spec = {};
  spec.noise_sigma = -1.0;
  CHECK_THROWS_AS(generate_phantom(spec), ValidationError);
  spec = {};
  spec.dims = Dims{8, 8, 2};
  CHECK_THROWS_AS(generate_phantom(spec), ValidationError);
}

TEST_CASE("psnr examples") {
  const Dims d{4, 4, 2};
  CMatrix ref = CMatrix::Constant(16, 2, Complex(0.5, 0.0));
  ref(3, 1) = Complex(0.0, 1.0);
  const DynamicVolume x(d, ref);
  CHECK(psnr(x, x) == kPsnrSentinel);

  // Uniform magnitude error of 0.1 at peak 1 gives 20 dB.
  CMatrix est = ref;
  for (Eigen::Index i = 0; i < est.size(); ++i) {
    const double mag = std::abs(ref.data()[i]);
    est.data()[i] *= (mag + 0.1) / mag;
  }
  CHECK(psnr(x, DynamicVolume(d, est)) == doctest::Approx(20.0).epsilon(1e-12));

  // Zero estimate: 20 log10(max|x| / rms|x|).
  const double rms = std::sqrt((31 * 0.25 + 1.0) / 32.0);
  CHECK(psnr(x, DynamicVolume(d)) == doctest::Approx(20.0 * std::log10(1.0 / rms)).epsilon(1e-12));

  // Magnitudes only: a global phase does not count as error.
  CHECK(psnr(x, DynamicVolume(d, ref * Complex(0.0, 1.0))) == kPsnrSentinel);

  CHECK_THROWS_AS(psnr(x, DynamicVolume(Dims{4, 4, 1})), ValidationError);
  CHECK_THROWS_AS(psnr(DynamicVolume(d), x), ValidationError);
}
