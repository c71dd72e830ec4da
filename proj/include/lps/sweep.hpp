// Reproducible PSNR-versus-sampling-rate experiments over solvers and seeds.
#pragma once

#include "lps/config.hpp"
#include "lps/core.hpp"
#include "lps/phantom.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace lps {

enum class SolverId { kLs, kPrioriLs };

std::string to_string(SolverId id);
/// Accepts "ls" and "priori-ls".
SolverId parse_solver_id(std::string_view text);

struct ExperimentSpec {
  PhantomSpec phantom;
  double first_frame_rate = 0.5;
  std::vector<double> rates{1.0 / 7.0, 1.0 / 5.0, 1.0 / 3.0};  // later frames
  std::vector<SolverId> solvers{SolverId::kLs, SolverId::kPrioriLs};
  std::size_t n_seeds = 5;
  double density_falloff = 2.0;
  bool per_slice_masks = true;  // one mask layer per slice, else one shared layer
  SolverConfig ls;              // frame 0 of every run and all frames of `ls` runs
  SolverConfig priori;          // later frames of `priori-ls` runs
  std::filesystem::path output_dir = ".";
  std::size_t threads = 1;

  void validate() const;
};

/// Reads [phantom], [solver.ls], [solver.priori] and [sweep]. The priori
/// section starts from the resolved ls settings.
ExperimentSpec experiment_spec_from(const ConfigFile& cfg, ExperimentSpec defaults = {});

/// Phantom seed of the `index`-th run (0-based).
std::uint64_t run_seed(const ExperimentSpec& spec, std::size_t index);

/// Mask seed for one (run seed, tier) pair. Tier 0 is the first frame, tier
/// k >= 1 the k-th entry of `rates`. All frames of a tier share its mask.
std::uint64_t mask_seed(std::uint64_t run_seed, std::size_t tier);

struct SweepRow {
  SolverId solver = SolverId::kLs;
  double rate = 0.0;        // sweep rate of the cell
  double frame_rate = 0.0;  // rate actually used for this frame
  std::uint64_t seed = 0;
  std::size_t frame = 0;    // 0-based
  double psnr = 0.0;
  int iterations = 0;
  bool converged = false;
  double wall_seconds = 0.0;  // logged, never written to CSV
};

struct SummaryRow {
  SolverId solver = SolverId::kLs;
  double rate = 0.0;
  double mean_psnr = 0.0;  // over frames >= 1 and all seeds
  std::size_t samples = 0;
};

struct SweepResult {
  std::vector<SweepRow> rows;  // sorted by (solver, rate, seed, frame)
  std::vector<SummaryRow> summary;
};

/// Runs the whole grid. Cells run on `spec.threads` workers; results do not
/// depend on the worker count.
SweepResult run_sweep(const ExperimentSpec& spec);

std::string format_sweep_csv(const std::vector<SweepRow>& rows);
std::string format_summary_csv(const std::vector<SummaryRow>& rows);

/// run_sweep, then writes sweep.csv, summary.csv and run.log to output_dir.
SweepResult run_sweep_to_disk(const ExperimentSpec& spec);

}  // namespace lps
