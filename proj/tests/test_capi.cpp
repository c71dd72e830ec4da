#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lps/lps.h"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace {

namespace fs = std::filesystem;

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using Volume = std::unique_ptr<lps_volume, Deleter<lps_volume, lps_volume_free>>;
using Mask = std::unique_ptr<lps_mask, Deleter<lps_mask, lps_mask_free>>;
using KSpace = std::unique_ptr<lps_kspace, Deleter<lps_kspace, lps_kspace_free>>;
using Settings = std::unique_ptr<lps_settings, Deleter<lps_settings, lps_settings_free>>;
using Results = std::unique_ptr<lps_results, Deleter<lps_results, lps_results_free>>;
using Phantom = std::unique_ptr<lps_phantom, Deleter<lps_phantom, lps_phantom_free>>;

struct Scratch {
  fs::path dir;
  Scratch() {
    std::random_device rd;
    dir = fs::temp_directory_path() / ("lps-capi-" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(dir);
  }
  ~Scratch() {
    std::error_code ec;
    fs::remove_all(dir, ec);
  }
  std::string operator/(const std::string& name) const { return (dir / name).string(); }
};

Volume make_volume(std::size_t nx, std::size_t ny, std::size_t nz, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  std::vector<double> data(2 * nx * ny * nz);
  for (auto& v : data) v = n(rng);
  lps_volume* v = nullptr;
  REQUIRE(lps_volume_create(nx, ny, nz, data.data(), &v) == LPS_OK);
  return Volume(v);
}

Settings small_settings() {
  lps_settings* s = nullptr;
  REQUIRE(lps_settings_create(&s) == LPS_OK);
  Settings out(s);
  REQUIRE(lps_settings_set(s, "phantom", "nx", "16") == LPS_OK);
  REQUIRE(lps_settings_set(s, "phantom", "ny", "16") == LPS_OK);
  REQUIRE(lps_settings_set(s, "phantom", "nz", "2") == LPS_OK);
  REQUIRE(lps_settings_set(s, "phantom", "frames", "3") == LPS_OK);
  REQUIRE(lps_settings_set(s, "phantom", "rank", "1") == LPS_OK);
  REQUIRE(lps_settings_set(s, "phantom", "blobs", "2") == LPS_OK);
  REQUIRE(lps_settings_set(s, "phantom", "blob_width", "1") == LPS_OK);
  return out;
}

}  // namespace

TEST_CASE("status names and sentinel") {
  CHECK(std::string(lps_status_name(LPS_OK)) == "ok");
  CHECK(std::string(lps_status_name(LPS_ERR_TRUNCATED)) != std::string(lps_status_name(LPS_ERR_FORMAT)));
  CHECK(std::string(lps_status_name(static_cast<lps_status>(99))) == "unknown status");
  CHECK(lps_psnr_sentinel() >= 300.0);
}

TEST_CASE("null arguments") {
  lps_volume* v = nullptr;
  CHECK(lps_volume_create(4, 4, 1, nullptr, nullptr) == LPS_ERR_NULL_ARG);
  CHECK(std::string(lps_last_error()).find("out") != std::string::npos);
  CHECK(lps_volume_load(nullptr, &v) == LPS_ERR_NULL_ARG);
  CHECK(lps_volume_save(nullptr, "x") == LPS_ERR_NULL_ARG);
  CHECK(lps_acquire(nullptr, nullptr, nullptr) == LPS_ERR_NULL_ARG);
  CHECK(lps_solve(nullptr, nullptr, nullptr) == LPS_ERR_NULL_ARG);
  CHECK(lps_results_count(nullptr) == 0);
  CHECK(lps_phantom_frames(nullptr) == 0);
  lps_volume_free(nullptr);
  lps_mask_free(nullptr);
  lps_kspace_free(nullptr);
  lps_settings_free(nullptr);
  lps_results_free(nullptr);
  lps_phantom_free(nullptr);
}

TEST_CASE("volume round trip and load errors") {
  Scratch dir;
  const auto v = make_volume(4, 6, 3, 1);
  const std::string path = dir / "v.lpsv";
  REQUIRE(lps_volume_save(v.get(), path.c_str()) == LPS_OK);

  lps_volume* raw = nullptr;
  REQUIRE(lps_volume_load(path.c_str(), &raw) == LPS_OK);
  const Volume loaded(raw);
  size_t nx = 0, ny = 0, nz = 0;
  REQUIRE(lps_volume_dims(loaded.get(), &nx, &ny, &nz) == LPS_OK);
  CHECK(nx == 4);
  CHECK(ny == 6);
  CHECK(nz == 3);
  std::vector<double> a(144), b(144);
  CHECK(lps_volume_read(v.get(), a.data(), a.size()) == LPS_OK);
  CHECK(lps_volume_read(loaded.get(), b.data(), b.size()) == LPS_OK);
  CHECK(a == b);
  CHECK(lps_volume_read(v.get(), a.data(), 10) == LPS_ERR_VALIDATION);

  CHECK(lps_volume_load((dir / "missing").c_str(), &raw) == LPS_ERR_IO);
  CHECK(raw == nullptr);
  fs::resize_file(path, 100);
  CHECK(lps_volume_load(path.c_str(), &raw) == LPS_ERR_TRUNCATED);
  std::ofstream(dir / "junk") << "not a volume at all, definitely";
  CHECK(lps_volume_load((dir / "junk").c_str(), &raw) == LPS_ERR_FORMAT);
  CHECK(std::string(lps_last_error()).size() > 0);

  CHECK(lps_volume_create(0, 4, 1, nullptr, &raw) == LPS_ERR_VALIDATION);
}

TEST_CASE("mask generation, info and files") {
  Scratch dir;
  lps_mask* raw = nullptr;
  REQUIRE(lps_mask_generate(16, 8, 0.25, 2.0, 7, 3, &raw) == LPS_OK);
  const Mask m(raw);
  size_t nx = 0, ny = 0, layers = 0, count = 0;
  REQUIRE(lps_mask_info(m.get(), &nx, &ny, &layers, &count) == LPS_OK);
  CHECK(nx == 16);
  CHECK(ny == 8);
  CHECK(layers == 3);
  CHECK(count == 32);
  const std::string path = dir / "m.lpsm";
  REQUIRE(lps_mask_save(m.get(), path.c_str()) == LPS_OK);
  REQUIRE(lps_mask_load(path.c_str(), &raw) == LPS_OK);
  const Mask loaded(raw);
  size_t count2 = 0, layers2 = 0;
  REQUIRE(lps_mask_info(loaded.get(), nullptr, nullptr, &layers2, &count2) == LPS_OK);
  CHECK(count2 == 32);
  CHECK(layers2 == 3);
  CHECK(lps_mask_generate(16, 8, 0.0, 2.0, 7, 1, &raw) == LPS_ERR_VALIDATION);
  CHECK(lps_mask_generate(16, 8, 0.5, 2.0, 7, 0, &raw) == LPS_ERR_VALIDATION);
}

TEST_CASE("acquisition and the full-mask inverse") {
  const auto v = make_volume(8, 8, 2, 3);
  lps_mask* raw = nullptr;
  REQUIRE(lps_mask_generate(8, 8, 1.0, 2.0, 1, 1, &raw) == LPS_OK);
  const Mask full(raw);
  lps_kspace* y = nullptr;
  REQUIRE(lps_acquire(v.get(), full.get(), &y) == LPS_OK);
  const KSpace ky(y);
  lps_volume* back = nullptr;
  REQUIRE(lps_acquire_adjoint(ky.get(), &back) == LPS_OK);
  const Volume vb(back);
  std::vector<double> a(256), b(256);
  REQUIRE(lps_volume_read(v.get(), a.data(), a.size()) == LPS_OK);
  REQUIRE(lps_volume_read(vb.get(), b.data(), b.size()) == LPS_OK);
  double err = 0;
  for (std::size_t i = 0; i < a.size(); ++i) err = std::max(err, std::abs(a[i] - b[i]));
  CHECK(err < 1e-12);

  REQUIRE(lps_mask_generate(16, 16, 0.5, 2.0, 1, 1, &raw) == LPS_OK);
  const Mask wrong(raw);
  CHECK(lps_acquire(v.get(), wrong.get(), &y) == LPS_ERR_VALIDATION);
  CHECK(y == nullptr);
}

TEST_CASE("settings") {
  Scratch dir;
  lps_settings* raw = nullptr;
  REQUIRE(lps_settings_create(&raw) == LPS_OK);
  const Settings s(raw);
  const char* value = "x";
  REQUIRE(lps_settings_get(s.get(), "solver.ls", "lambda_L", &value) == LPS_OK);
  CHECK(value == nullptr);
  REQUIRE(lps_settings_set(s.get(), "solver.ls", "lambda_L", "0.05") == LPS_OK);
  REQUIRE(lps_settings_get(s.get(), "solver.ls", "lambda_L", &value) == LPS_OK);
  CHECK(std::string(value) == "0.05");
  CHECK(lps_settings_validate(s.get()) == LPS_OK);

  REQUIRE(lps_settings_set(s.get(), "solver.ls", "lambda_L", "-2") == LPS_OK);
  CHECK(lps_settings_validate(s.get()) == LPS_ERR_VALIDATION);
  REQUIRE(lps_settings_set(s.get(), "solver.ls", "lambda_L", "0.05") == LPS_OK);
  REQUIRE(lps_settings_set(s.get(), "solverr", "x", "1") == LPS_OK);
  CHECK(lps_settings_validate(s.get()) == LPS_ERR_VALIDATION);
  CHECK(std::string(lps_last_error()).find("solverr") != std::string::npos);

  std::ofstream(dir / "a.cfg") << "[sweep]\nseeds = 2\n";
  REQUIRE(lps_settings_load((dir / "a.cfg").c_str(), &raw) == LPS_OK);
  const Settings loaded(raw);
  REQUIRE(lps_settings_get(loaded.get(), "sweep", "seeds", &value) == LPS_OK);
  CHECK(std::string(value) == "2");
  std::ofstream(dir / "b.cfg") << "seeds = 2\n";
  CHECK(lps_settings_load((dir / "b.cfg").c_str(), &raw) == LPS_ERR_VALIDATION);
  CHECK(lps_settings_load((dir / "none.cfg").c_str(), &raw) == LPS_ERR_IO);
}

TEST_CASE("phantom, solve and psnr through the C API") {
  const auto s = small_settings();
  lps_phantom* rawp = nullptr;
  REQUIRE(lps_phantom_generate(s.get(), &rawp) == LPS_OK);
  const Phantom p(rawp);
  REQUIRE(lps_phantom_frames(p.get()) == 3);

  std::vector<KSpace> frames;
  std::vector<Volume> truth;
  for (std::size_t t = 0; t < 3; ++t) {
    lps_volume* x = nullptr;
    REQUIRE(lps_phantom_component(p.get(), t, LPS_COMPONENT_X, &x) == LPS_OK);
    truth.emplace_back(x);
    lps_mask* m = nullptr;
    REQUIRE(lps_mask_generate(16, 16, t == 0 ? 0.5 : 0.3, 2.0, 10 + t, 2, &m) == LPS_OK);
    const Mask mask(m);
    lps_kspace* y = nullptr;
    REQUIRE(lps_acquire(x, mask.get(), &y) == LPS_OK);
    frames.emplace_back(y);
  }
  lps_volume* dummy = nullptr;
  CHECK(lps_phantom_component(p.get(), 3, LPS_COMPONENT_X, &dummy) == LPS_ERR_VALIDATION);

  lps_results* raw = nullptr;
  REQUIRE(lps_solve(frames[0].get(), s.get(), &raw) == LPS_OK);
  const Results single(raw);
  REQUIRE(lps_results_count(single.get()) == 1);
  lps_result_info info{};
  REQUIRE(lps_results_info(single.get(), 0, &info) == LPS_OK);
  CHECK(info.iterations >= 1);
  CHECK(info.lambda_L > 0.0);
  CHECK(info.data_residual >= 0.0);
  if (info.converged) CHECK(info.final_change < 1e-3);
  CHECK(lps_results_info(single.get(), 1, &info) == LPS_ERR_VALIDATION);

  std::vector<const lps_kspace*> ptrs;
  for (const auto& f : frames) ptrs.push_back(f.get());
  size_t failed = 0;
  for (const lps_solver solver : {LPS_SOLVER_LS, LPS_SOLVER_PRIORI_LS}) {
    REQUIRE(lps_solve_sequence(ptrs.data(), ptrs.size(), s.get(), solver, &raw, &failed) == LPS_OK);
    const Results seq(raw);
    CHECK(failed == SIZE_MAX);
    REQUIRE(lps_results_count(seq.get()) == 3);
    for (std::size_t t = 0; t < 3; ++t) {
      lps_volume* x = nullptr;
      REQUIRE(lps_results_component(seq.get(), t, LPS_COMPONENT_X, &x) == LPS_OK);
      const Volume est(x);
      double db = 0;
      REQUIRE(lps_psnr(truth[t].get(), est.get(), &db) == LPS_OK);
      CHECK(db > 15.0);
    }
  }
  double db = 0;
  CHECK(lps_psnr(truth[0].get(), truth[0].get(), &db) == LPS_OK);
  CHECK(db == lps_psnr_sentinel());
}

TEST_CASE("sequence failures report the frame index") {
  const auto s = small_settings();
  const auto good = make_volume(16, 16, 2, 1);
  const auto odd = make_volume(8, 8, 2, 2);
  lps_mask *m16 = nullptr, *m8 = nullptr;
  REQUIRE(lps_mask_generate(16, 16, 0.5, 2.0, 1, 1, &m16) == LPS_OK);
  REQUIRE(lps_mask_generate(8, 8, 0.5, 2.0, 1, 1, &m8) == LPS_OK);
  const Mask mask16(m16), mask8(m8);
  lps_kspace *a = nullptr, *b = nullptr;
  REQUIRE(lps_acquire(good.get(), mask16.get(), &a) == LPS_OK);
  REQUIRE(lps_acquire(odd.get(), mask8.get(), &b) == LPS_OK);
  const KSpace ka(a), kb(b);

  const lps_kspace* frames[] = {ka.get(), ka.get(), kb.get()};
  lps_results* out = nullptr;
  size_t failed = 0;
  CHECK(lps_solve_sequence(frames, 3, s.get(), LPS_SOLVER_PRIORI_LS, &out, &failed) ==
        LPS_ERR_VALIDATION);
  CHECK(failed == 2);
  CHECK(out == nullptr);
  CHECK(std::string(lps_last_error()).find("frame 2") != std::string::npos);

  const lps_kspace* with_null[] = {ka.get(), nullptr};
  CHECK(lps_solve_sequence(with_null, 2, s.get(), LPS_SOLVER_LS, &out, &failed) == LPS_ERR_NULL_ARG);
  CHECK(failed == 1);

  lps_settings* raw = nullptr;
  REQUIRE(lps_settings_create(&raw) == LPS_OK);
  const Settings bad(raw);
  REQUIRE(lps_settings_set(bad.get(), "solver.priori", "lambda_p", "3") == LPS_OK);
  CHECK(lps_solve_sequence(frames, 2, bad.get(), LPS_SOLVER_PRIORI_LS, &out, &failed) ==
        LPS_ERR_VALIDATION);
  CHECK(failed == SIZE_MAX);
  CHECK(lps_solve_sequence(frames, 2, s.get(), static_cast<lps_solver>(7), &out, &failed) ==
        LPS_ERR_VALIDATION);
  CHECK(lps_solve_sequence(frames, 0, s.get(), LPS_SOLVER_LS, &out, &failed) == LPS_ERR_VALIDATION);
}

TEST_CASE("sweep through the C API") {
  Scratch dir;
  const auto s = small_settings();
  REQUIRE(lps_settings_set(s.get(), "sweep", "rates", "0.25") == LPS_OK);
  REQUIRE(lps_settings_set(s.get(), "sweep", "seeds", "1") == LPS_OK);
  size_t failed = 0;
  REQUIRE(lps_sweep_run(s.get(), dir.dir.c_str(), &failed) == LPS_OK);
  CHECK(failed == SIZE_MAX);
  for (const char* name : {"sweep.csv", "summary.csv", "run.log"}) CHECK(fs::exists(dir.dir / name));

  REQUIRE(lps_settings_set(s.get(), "sweep", "rates", "2") == LPS_OK);
  CHECK(lps_sweep_run(s.get(), dir.dir.c_str(), &failed) == LPS_ERR_VALIDATION);
}
