// Baseline L+S and prior-informed L+S reconstruction, plus the sequential
// pipeline that carries priors from one time instant to the next.
#pragma once

#include "lps/core.hpp"
#include "lps/operators.hpp"

#include <exception>
#include <functional>
#include <vector>

namespace lps {

struct SolveResult {
  Decomposition decomposition;
  int iterations = 0;
  bool converged = false;
  std::vector<double> residual_history;  // relative change per iteration
  double data_residual = 0.0;            // ||y - A(L + S)||_F at exit
  double lambda_L = 0.0;                 // thresholds actually applied
  double lambda_S = 0.0;
};

/// Called after every iteration with the 1-based iteration number and the
/// data-consistent estimate X produced by that iteration.
using IterationObserver = std::function<void(int iteration, const CMatrix& x)>;

SolveResult solve_ls(const KSpaceData& y, const SolverConfig& cfg,
                     const IterationObserver& observer = {});

SolveResult solve_priori_ls(const KSpaceData& y, const Prior& prior, const SolverConfig& cfg,
                            const IterationObserver& observer = {});

/// Prior for the next time instant: spectrum of L and the support of T(S).
Prior make_prior(const Decomposition& previous, const Dims& dims, double support_eps);

enum class SequenceMode {
  kPriori,    // frame 1 with solve_ls, later frames with solve_priori_ls
  kBaseline,  // solve_ls for every frame
};

/// Raised by solve_sequence; wraps the per-frame failure.
class FrameError : public Error {
 public:
  FrameError(std::size_t frame, const std::string& what, std::exception_ptr cause)
      : Error("frame " + std::to_string(frame) + ": " + what), frame_(frame), cause_(cause) {}

  std::size_t frame() const { return frame_; }
  std::exception_ptr cause() const { return cause_; }

 private:
  std::size_t frame_;
  std::exception_ptr cause_;
};

std::vector<SolveResult> solve_sequence(const std::vector<KSpaceData>& frames,
                                        const SolverConfig& cfg_first,
                                        const SolverConfig& cfg_rest,
                                        SequenceMode mode = SequenceMode::kPriori);

}  // namespace lps
