#include "lps/solvers.hpp"

#include <cmath>

namespace lps {

namespace {

struct Thresholds {
  double low_rank;
  double sparse;
};

Thresholds resolve_thresholds(const SolverConfig& cfg, const CMatrix& proxy, const Dims& dims) {
  if (cfg.mode == ThresholdMode::kAbsolute) return {cfg.lambda_L, cfg.lambda_S};
  const double sigma_max = svd(proxy).sigma(0);
  const CMatrix w = wavelet_forward(proxy, dims);
  const double coeff_max = w.size() > 0 ? w.cwiseAbs().maxCoeff() : 0.0;
  return {cfg.lambda_L * sigma_max, cfg.lambda_S * coeff_max};
}

// Data consistency: X = L + S - A^H(A(L + S) - y).
CMatrix enforce_data_consistency(const CMatrix& low_plus_sparse, const KSpaceData& y) {
  const CMatrix residual = acquire_matrix(low_plus_sparse, y.mask, y.dims) - y.samples;
  return low_plus_sparse - acquire_adjoint_matrix(residual, y.mask, y.dims);
}

// Shared loop skeleton. `update` maps (X, S_prev) to the next (L, S).
template <typename Update>
SolveResult iterate(const KSpaceData& y, const SolverConfig& cfg, const IterationObserver& observer,
                    Update&& update) {
  CMatrix x = acquire_adjoint_matrix(y.samples, y.mask, y.dims);
  const Thresholds th = resolve_thresholds(cfg, x, y.dims);

  SolveResult result;
  result.lambda_L = th.low_rank;
  result.lambda_S = th.sparse;
  Decomposition& dec = result.decomposition;
  dec.low_rank = CMatrix::Zero(x.rows(), x.cols());
  dec.sparse = CMatrix::Zero(x.rows(), x.cols());

  for (int it = 1; it <= cfg.max_iter; ++it) {
    update(x, th, dec);
    CMatrix x_next = enforce_data_consistency(dec.sum(), y);
    if (!all_finite(x_next))
      throw NumericalError("non-finite iterate at iteration " + std::to_string(it));

    const double change = relative_change(x_next, x);
    result.residual_history.push_back(change);
    result.iterations = it;
    x = std::move(x_next);
    if (observer) observer(it, x);
    if (change < cfg.tol) {
      result.converged = true;
      break;
    }
  }
  result.data_residual =
      (y.samples - acquire_matrix(dec.sum(), y.mask, y.dims)).norm();
  return result;
}

}  // namespace

SolveResult solve_ls(const KSpaceData& y, const SolverConfig& cfg,
                     const IterationObserver& observer) {
  cfg.validate();
  y.validate();
  return iterate(y, cfg, observer, [&](const CMatrix& x, const Thresholds& th, Decomposition& d) {
    d.low_rank = sv_threshold(x - d.sparse, th.low_rank);
    const CMatrix w = wavelet_forward(x - d.low_rank, y.dims);
    d.sparse = wavelet_inverse(soft_threshold_matrix(w, th.sparse), y.dims);
  });
}

SolveResult solve_priori_ls(const KSpaceData& y, const Prior& prior, const SolverConfig& cfg,
                            const IterationObserver& observer) {
  cfg.validate();
  y.validate();
  prior.validate();
  if (static_cast<std::size_t>(prior.sigma_prev.size()) != y.dims.nz)
    throw ValidationError("prior spectrum has length " + std::to_string(prior.sigma_prev.size()) +
                          ", frame has n_z = " + std::to_string(y.dims.nz));
  prior.support_prev.check_bounds(y.dims.pixels(), y.dims.nz);

  return iterate(y, cfg, observer, [&](const CMatrix& x, const Thresholds& th, Decomposition& d) {
    // SVT, then pull the spectrum toward the previous instant's. One SVD
    // serves both steps so that directions zeroed by the threshold can be
    // restored by the prior.
    d.low_rank = sv_threshold_with_prior(x - d.sparse, th.low_rank, prior.sigma_prev,
                                         cfg.lambda_p);
    // shrink transform coefficients outside the previous support only
    const CMatrix w = wavelet_forward(x - d.low_rank, y.dims);
    d.sparse = wavelet_inverse(soft_threshold_restricted(w, th.sparse, prior.support_prev),
                               y.dims);
  });
}

Prior make_prior(const Decomposition& previous, const Dims& dims, double support_eps) {
  Prior prior;
  prior.sigma_prev = svd(previous.low_rank).sigma;
  prior.support_prev = extract_support(wavelet_forward(previous.sparse, dims), support_eps);
  return prior;
}

std::vector<SolveResult> solve_sequence(const std::vector<KSpaceData>& frames,
                                        const SolverConfig& cfg_first,
                                        const SolverConfig& cfg_rest, SequenceMode mode) {
  if (frames.empty()) throw ValidationError("solve_sequence: no frames");
  for (std::size_t t = 1; t < frames.size(); ++t) {
    if (!(frames[t].dims == frames[0].dims))
      throw FrameError(t, "dims " + to_string(frames[t].dims) + " differ from frame 0 dims " +
                              to_string(frames[0].dims),
                       std::make_exception_ptr(ValidationError("frame dims differ")));
  }

  std::vector<SolveResult> results;
  results.reserve(frames.size());
  for (std::size_t t = 0; t < frames.size(); ++t) {
    try {
      if (t == 0) {
        results.push_back(solve_ls(frames[t], cfg_first));
      } else if (mode == SequenceMode::kBaseline) {
        results.push_back(solve_ls(frames[t], cfg_rest));
      } else {
        const Prior prior =
            make_prior(results.back().decomposition, frames[t].dims, cfg_rest.support_eps);
        results.push_back(solve_priori_ls(frames[t], prior, cfg_rest));
      }
    } catch (const Error& e) {
      throw FrameError(t, e.what(), std::current_exception());
    }
  }
  return results;
}

}  // namespace lps
