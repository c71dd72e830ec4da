#include "lps/lps.h"

#include "lps/config.hpp"
#include "lps/operators.hpp"
#include "lps/phantom.hpp"
#include "lps/solvers.hpp"
#include "lps/sweep.hpp"

#include <cstdint>
#include <new>
#include <string>

struct lps_volume {
  lps::DynamicVolume v;
};
struct lps_mask {
  lps::SamplingMask m;
};
struct lps_kspace {
  lps::KSpaceData y;
};
struct lps_settings {
  lps::ConfigFile cfg;
};
struct lps_results {
  lps::Dims dims;
  std::vector<lps::SolveResult> items;
};
struct lps_phantom {
  std::vector<lps::PhantomFrame> frames;
};

namespace {

thread_local std::string g_last_error;

lps_status fail(lps_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

// Maps the active exception to a status code. Must be called from a catch.
lps_status translate(std::size_t* failed_frame = nullptr) {
  try {
    throw;
  } catch (const lps::FrameError& e) {
    if (failed_frame) *failed_frame = e.frame();
    lps_status status = LPS_ERR_INTERNAL;
    try {
      if (e.cause()) std::rethrow_exception(e.cause());
    } catch (...) {
      status = translate();
    }
    return fail(status, e.what());
  } catch (const lps::ValidationError& e) {
    return fail(LPS_ERR_VALIDATION, e.what());
  } catch (const lps::TruncationError& e) {
    return fail(LPS_ERR_TRUNCATED, e.what());
  } catch (const lps::FormatError& e) {
    return fail(LPS_ERR_FORMAT, e.what());
  } catch (const lps::IoError& e) {
    return fail(LPS_ERR_IO, e.what());
  } catch (const lps::DimensionError& e) {
    return fail(LPS_ERR_DIMENSION, e.what());
  } catch (const lps::NumericalError& e) {
    return fail(LPS_ERR_NUMERICAL, e.what());
  } catch (const std::bad_alloc&) {
    return fail(LPS_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(LPS_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(LPS_ERR_INTERNAL, "unknown error");
  }
}

template <typename Fn>
lps_status guarded(Fn&& fn) {
  try {
    fn();
    return LPS_OK;
  } catch (...) {
    return translate();
  }
}

lps_status null_arg(const char* what) {
  return fail(LPS_ERR_NULL_ARG, std::string(what) + " must not be NULL");
}

#define LPS_REQUIRE(arg) \
  if ((arg) == nullptr) return null_arg(#arg)

lps::SolverConfig ls_config(const lps_settings* s) {
  return lps::solver_config_from(s->cfg, lps::kBaselineSection);
}

lps::SolverConfig priori_config(const lps_settings* s, const lps::SolverConfig& ls) {
  lps::ExperimentSpec defaults;
  lps::SolverConfig base = ls;
  base.lambda_p = defaults.priori.lambda_p;
  return lps::solver_config_from(s->cfg, lps::kPrioriSection, base);
}

}  // namespace

extern "C" {

const char* lps_last_error(void) { return g_last_error.c_str(); }

const char* lps_status_name(lps_status status) {
  switch (status) {
    case LPS_OK: return "ok";
    case LPS_ERR_VALIDATION: return "validation error";
    case LPS_ERR_FORMAT: return "format error";
    case LPS_ERR_TRUNCATED: return "truncated file";
    case LPS_ERR_IO: return "i/o error";
    case LPS_ERR_DIMENSION: return "dimension mismatch";
    case LPS_ERR_NUMERICAL: return "numerical error";
    case LPS_ERR_INTERNAL: return "internal error";
    case LPS_ERR_NULL_ARG: return "null argument";
  }
  return "unknown status";
}

double lps_psnr_sentinel(void) { return lps::kPsnrSentinel; }

lps_status lps_volume_create(size_t nx, size_t ny, size_t nz, const double* data,
                             lps_volume** out) {
  LPS_REQUIRE(out);
  *out = nullptr;
  return guarded([&] {
    const lps::Dims dims{nx, ny, nz};
    lps::DynamicVolume v(dims);
    if (data) {
      lps::CMatrix m(static_cast<Eigen::Index>(dims.pixels()), static_cast<Eigen::Index>(nz));
      for (std::size_t i = 0; i < dims.elements(); ++i)
        m.data()[i] = lps::Complex(data[2 * i], data[2 * i + 1]);
      v = lps::DynamicVolume(dims, std::move(m));
    }
    *out = new lps_volume{std::move(v)};
  });
}

lps_status lps_volume_load(const char* path, lps_volume** out) {
  LPS_REQUIRE(path);
  LPS_REQUIRE(out);
  *out = nullptr;
  return guarded([&] { *out = new lps_volume{lps::load_volume(path)}; });
}

lps_status lps_volume_save(const lps_volume* v, const char* path) {
  LPS_REQUIRE(v);
  LPS_REQUIRE(path);
  return guarded([&] { lps::save_volume(path, v->v); });
}

lps_status lps_volume_dims(const lps_volume* v, size_t* nx, size_t* ny, size_t* nz) {
  LPS_REQUIRE(v);
  const auto d = v->v.dims();
  if (nx) *nx = d.nx;
  if (ny) *ny = d.ny;
  if (nz) *nz = d.nz;
  return LPS_OK;
}

lps_status lps_volume_read(const lps_volume* v, double* out, size_t capacity) {
  LPS_REQUIRE(v);
  LPS_REQUIRE(out);
  const std::size_t n = v->v.dims().elements();
  if (capacity < 2 * n)
    return fail(LPS_ERR_VALIDATION, "buffer holds " + std::to_string(capacity) +
                                        " doubles, volume needs " + std::to_string(2 * n));
  const lps::Complex* src = v->v.data().data();
  for (std::size_t i = 0; i < n; ++i) {
    out[2 * i] = src[i].real();
    out[2 * i + 1] = src[i].imag();
  }
  return LPS_OK;
}

void lps_volume_free(lps_volume* v) { delete v; }

lps_status lps_mask_generate(size_t nx, size_t ny, double rate, double density_falloff,
                             uint64_t seed, size_t layers, lps_mask** out) {
  LPS_REQUIRE(out);
  *out = nullptr;
  return guarded(
      [&] { *out = new lps_mask{lps::make_mask(nx, ny, rate, density_falloff, seed, layers)}; });
}

lps_status lps_mask_load(const char* path, lps_mask** out) {
  LPS_REQUIRE(path);
  LPS_REQUIRE(out);
  *out = nullptr;
  return guarded([&] { *out = new lps_mask{lps::load_mask(path)}; });
}

lps_status lps_mask_save(const lps_mask* m, const char* path) {
  LPS_REQUIRE(m);
  LPS_REQUIRE(path);
  return guarded([&] { lps::save_mask(path, m->m); });
}

lps_status lps_mask_info(const lps_mask* m, size_t* nx, size_t* ny, size_t* layers,
                         size_t* count) {
  LPS_REQUIRE(m);
  if (nx) *nx = m->m.nx();
  if (ny) *ny = m->m.ny();
  if (layers) *layers = m->m.layers();
  if (count) *count = m->m.count();
  return LPS_OK;
}

void lps_mask_free(lps_mask* m) { delete m; }

lps_status lps_acquire(const lps_volume* x, const lps_mask* m, lps_kspace** out) {
  LPS_REQUIRE(x);
  LPS_REQUIRE(m);
  LPS_REQUIRE(out);
  *out = nullptr;
  return guarded([&] { *out = new lps_kspace{lps::acquire(x->v, m->m)}; });
}

lps_status lps_acquire_adjoint(const lps_kspace* y, lps_volume** out) {
  LPS_REQUIRE(y);
  LPS_REQUIRE(out);
  *out = nullptr;
  return guarded([&] { *out = new lps_volume{lps::acquire_adjoint(y->y)}; });
}

void lps_kspace_free(lps_kspace* y) { delete y; }

lps_status lps_settings_create(lps_settings** out) {
  LPS_REQUIRE(out);
  *out = nullptr;
  return guarded([&] { *out = new lps_settings{}; });
}

lps_status lps_settings_load(const char* path, lps_settings** out) {
  LPS_REQUIRE(path);
  LPS_REQUIRE(out);
  *out = nullptr;
  return guarded([&] { *out = new lps_settings{lps::ConfigFile::load(path)}; });
}

lps_status lps_settings_set(lps_settings* s, const char* section, const char* key,
                            const char* value) {
  LPS_REQUIRE(s);
  LPS_REQUIRE(section);
  LPS_REQUIRE(key);
  LPS_REQUIRE(value);
  return guarded([&] { s->cfg.set(section, key, value); });
}

lps_status lps_settings_get(const lps_settings* s, const char* section, const char* key,
                            const char** value) {
  LPS_REQUIRE(s);
  LPS_REQUIRE(section);
  LPS_REQUIRE(key);
  LPS_REQUIRE(value);
  *value = nullptr;
  const auto& sections = s->cfg.sections();
  if (const auto sec = sections.find(std::string_view(section)); sec != sections.end())
    if (const auto it = sec->second.find(std::string_view(key)); it != sec->second.end())
      *value = it->second.c_str();
  return LPS_OK;
}

lps_status lps_settings_validate(const lps_settings* s) {
  LPS_REQUIRE(s);
  return guarded([&] {
    for (const auto& [section, entries] : s->cfg.sections()) {
      if (section != lps::kPhantomSection && section != lps::kBaselineSection &&
          section != lps::kPrioriSection && section != lps::kSweepSection)
        throw lps::ValidationError("unknown section [" + section + "]");
    }
    (void)lps::experiment_spec_from(s->cfg);
  });
}

void lps_settings_free(lps_settings* s) { delete s; }

lps_status lps_solve(const lps_kspace* y, const lps_settings* s, lps_results** out) {
  LPS_REQUIRE(y);
  LPS_REQUIRE(s);
  LPS_REQUIRE(out);
  *out = nullptr;
  return guarded([&] {
    auto result = lps::solve_ls(y->y, ls_config(s));
    *out = new lps_results{y->y.dims, {std::move(result)}};
  });
}

lps_status lps_solve_sequence(const lps_kspace* const* frames, size_t n_frames,
                              const lps_settings* s, lps_solver solver, lps_results** out,
                              size_t* failed_frame) {
  LPS_REQUIRE(frames);
  LPS_REQUIRE(s);
  LPS_REQUIRE(out);
  *out = nullptr;
  if (failed_frame) *failed_frame = SIZE_MAX;
  try {
    if (solver != LPS_SOLVER_LS && solver != LPS_SOLVER_PRIORI_LS)
      throw lps::ValidationError("unknown solver id " + std::to_string(static_cast<int>(solver)));
    std::vector<lps::KSpaceData> data;
    data.reserve(n_frames);
    for (std::size_t t = 0; t < n_frames; ++t) {
      if (frames[t] == nullptr) {
        if (failed_frame) *failed_frame = t;
        return null_arg("frames[i]");
      }
      data.push_back(frames[t]->y);
    }
    const auto ls = ls_config(s);
    const auto rest = solver == LPS_SOLVER_LS ? ls : priori_config(s, ls);
    const auto mode =
        solver == LPS_SOLVER_LS ? lps::SequenceMode::kBaseline : lps::SequenceMode::kPriori;
    auto results = lps::solve_sequence(data, ls, rest, mode);
    *out = new lps_results{data.front().dims, std::move(results)};
    return LPS_OK;
  } catch (...) {
    return translate(failed_frame);
  }
}

size_t lps_results_count(const lps_results* r) { return r ? r->items.size() : 0; }

lps_status lps_results_info(const lps_results* r, size_t index, lps_result_info* out) {
  LPS_REQUIRE(r);
  LPS_REQUIRE(out);
  if (index >= r->items.size()) return fail(LPS_ERR_VALIDATION, "result index out of range");
  const auto& item = r->items[index];
  out->iterations = item.iterations;
  out->converged = item.converged ? 1 : 0;
  out->final_change = item.residual_history.empty() ? 0.0 : item.residual_history.back();
  out->data_residual = item.data_residual;
  out->lambda_L = item.lambda_L;
  out->lambda_S = item.lambda_S;
  return LPS_OK;
}

lps_status lps_results_component(const lps_results* r, size_t index, lps_component which,
                                 lps_volume** out) {
  LPS_REQUIRE(r);
  LPS_REQUIRE(out);
  *out = nullptr;
  if (index >= r->items.size()) return fail(LPS_ERR_VALIDATION, "result index out of range");
  return guarded([&] {
    const auto& dec = r->items[index].decomposition;
    switch (which) {
      case LPS_COMPONENT_X: *out = new lps_volume{lps::DynamicVolume(r->dims, dec.sum())}; break;
      case LPS_COMPONENT_L: *out = new lps_volume{lps::DynamicVolume(r->dims, dec.low_rank)}; break;
      case LPS_COMPONENT_S: *out = new lps_volume{lps::DynamicVolume(r->dims, dec.sparse)}; break;
      default: throw lps::ValidationError("unknown component");
    }
  });
}

void lps_results_free(lps_results* r) { delete r; }

lps_status lps_phantom_generate(const lps_settings* s, lps_phantom** out) {
  LPS_REQUIRE(s);
  LPS_REQUIRE(out);
  *out = nullptr;
  return guarded(
      [&] { *out = new lps_phantom{lps::generate_phantom(lps::phantom_spec_from(s->cfg))}; });
}

size_t lps_phantom_frames(const lps_phantom* p) { return p ? p->frames.size() : 0; }

lps_status lps_phantom_component(const lps_phantom* p, size_t frame, lps_component which,
                                 lps_volume** out) {
  LPS_REQUIRE(p);
  LPS_REQUIRE(out);
  *out = nullptr;
  if (frame >= p->frames.size()) return fail(LPS_ERR_VALIDATION, "phantom frame out of range");
  return guarded([&] {
    const auto& f = p->frames[frame];
    const auto dims = f.x.dims();
    switch (which) {
      case LPS_COMPONENT_X: *out = new lps_volume{f.x}; break;
      case LPS_COMPONENT_L: *out = new lps_volume{lps::DynamicVolume(dims, f.low_rank)}; break;
      case LPS_COMPONENT_S: *out = new lps_volume{lps::DynamicVolume(dims, f.sparse)}; break;
      default: throw lps::ValidationError("unknown component");
    }
  });
}

void lps_phantom_free(lps_phantom* p) { delete p; }

lps_status lps_psnr(const lps_volume* reference, const lps_volume* estimate, double* out) {
  LPS_REQUIRE(reference);
  LPS_REQUIRE(estimate);
  LPS_REQUIRE(out);
  return guarded([&] { *out = lps::psnr(reference->v, estimate->v); });
}

lps_status lps_sweep_run(const lps_settings* s, const char* output_dir, size_t* failed_frame) {
  LPS_REQUIRE(s);
  if (failed_frame) *failed_frame = SIZE_MAX;
  try {
    auto spec = lps::experiment_spec_from(s->cfg);
    if (output_dir) spec.output_dir = output_dir;
    (void)lps::run_sweep_to_disk(spec);
    return LPS_OK;
  } catch (...) {
    return translate(failed_frame);
  }
}

}  // extern "C"
