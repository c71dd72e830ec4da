#include "lps/sweep.hpp"

#include "lps/operators.hpp"
#include "lps/solvers.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace lps {

namespace {

std::vector<std::string_view> split_list(std::string_view text) {
  std::vector<std::string_view> out;
  while (true) {
    const auto comma = text.find(',');
    auto item = text.substr(0, comma);
    while (!item.empty() && (item.front() == ' ' || item.front() == '\t')) item.remove_prefix(1);
    while (!item.empty() && (item.back() == ' ' || item.back() == '\t')) item.remove_suffix(1);
    out.push_back(item);
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return out;
}

// Rates may be written as fractions ("1/7") or decimals.
double parse_rate(std::string_view text, const std::string& what) {
  if (const auto slash = text.find('/'); slash != std::string_view::npos) {
    const double num = detail::parse_double(text.substr(0, slash), what);
    const double den = detail::parse_double(text.substr(slash + 1), what);
    if (den == 0.0) throw ValidationError(what + ": zero denominator");
    return num / den;
  }
  return detail::parse_double(text, what);
}

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct Cell {
  SolverId solver;
  std::size_t rate_index;
  std::size_t seed_index;
};

struct CellOutput {
  std::vector<SweepRow> rows;
  std::exception_ptr error;
};

std::string timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::string to_string(SolverId id) { return id == SolverId::kLs ? "ls" : "priori-ls"; }

SolverId parse_solver_id(std::string_view text) {
  if (text == "ls") return SolverId::kLs;
  if (text == "priori-ls") return SolverId::kPrioriLs;
  throw ValidationError("unknown solver '" + std::string(text) + "' (expected ls or priori-ls)");
}

void ExperimentSpec::validate() const {
  phantom.validate();
  if (phantom.dims.nx % 8 != 0 || phantom.dims.ny % 8 != 0)
    throw ValidationError("phantom n_x and n_y must be divisible by 8 for the wavelet transform, got " +
                          to_string(phantom.dims));
  ls.validate();
  priori.validate();
  if (!(first_frame_rate > 0.0 && first_frame_rate <= 1.0))
    throw ValidationError("first_frame_rate must lie in (0, 1]");
  if (rates.empty()) throw ValidationError("rates must not be empty");
  for (std::size_t i = 0; i < rates.size(); ++i) {
    if (!(rates[i] > 0.0 && rates[i] < 1.0)) throw ValidationError("rates must lie in (0, 1)");
    if (i > 0 && !(rates[i] > rates[i - 1]))
      throw ValidationError("rates must be strictly increasing");
  }
  if (solvers.empty()) throw ValidationError("solvers must not be empty");
  for (std::size_t i = 0; i < solvers.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (solvers[i] == solvers[j]) throw ValidationError("solvers listed twice");
  if (n_seeds == 0) throw ValidationError("n_seeds must be >= 1");
  if (!(density_falloff > 0.0)) throw ValidationError("density_falloff must be > 0");
  if (threads == 0) throw ValidationError("threads must be >= 1");
  const double pixels = static_cast<double>(phantom.dims.pixels());
  if (std::round(rates.front() * pixels) < 1.0)
    throw ValidationError("lowest rate samples no k-space points");
}

ExperimentSpec experiment_spec_from(const ConfigFile& cfg, ExperimentSpec out) {
  out.phantom = phantom_spec_from(cfg, out.phantom);
  out.ls = solver_config_from(cfg, kBaselineSection, out.ls);
  // Shared keys default to the baseline values; lambda_p is priori-only.
  SolverConfig priori_defaults = out.ls;
  priori_defaults.lambda_p = out.priori.lambda_p;
  out.priori = solver_config_from(cfg, kPrioriSection, priori_defaults);

  if (const auto it = cfg.sections().find(kSweepSection); it != cfg.sections().end()) {
    for (const auto& [key, value] : it->second) {
      const std::string what = "sweep." + key;
      if (key == "first_frame_rate") {
        out.first_frame_rate = parse_rate(value, what);
      } else if (key == "rates") {
        out.rates.clear();
        for (const auto item : split_list(value)) out.rates.push_back(parse_rate(item, what));
      } else if (key == "solvers") {
        out.solvers.clear();
        for (const auto item : split_list(value)) out.solvers.push_back(parse_solver_id(item));
      } else if (key == "seeds") {
        const auto v = detail::parse_integer(value, what);
        if (v < 1) throw ValidationError(what + " must be >= 1");
        out.n_seeds = static_cast<std::size_t>(v);
      } else if (key == "density_falloff") {
        out.density_falloff = detail::parse_double(value, what);
      } else if (key == "masks") {
        if (value == "per-slice") out.per_slice_masks = true;
        else if (value == "shared") out.per_slice_masks = false;
        else throw ValidationError(what + ": expected 'per-slice' or 'shared'");
      } else if (key == "threads") {
        const auto v = detail::parse_integer(value, what);
        if (v < 1) throw ValidationError(what + " must be >= 1");
        out.threads = static_cast<std::size_t>(v);
      } else if (key == "output_dir") {
        out.output_dir = value;
      } else {
        throw ValidationError("unknown key '" + key + "' in [sweep]");
      }
    }
  }
  out.validate();
  return out;
}

std::uint64_t run_seed(const ExperimentSpec& spec, std::size_t index) {
  return spec.phantom.seed + index;
}

std::uint64_t mask_seed(std::uint64_t run_seed, std::size_t tier) {
  return splitmix64(splitmix64(run_seed) ^ static_cast<std::uint64_t>(tier));
}

SweepResult run_sweep(const ExperimentSpec& spec) {
  spec.validate();
  const Dims dims = spec.phantom.dims;
  const std::size_t layers = spec.per_slice_masks ? dims.nz : 1;

  // Phantoms and masks are shared by all cells of a seed, so the solvers are
  // compared on identical data.
  std::vector<std::vector<PhantomFrame>> phantoms(spec.n_seeds);
  std::vector<std::vector<SamplingMask>> masks(spec.n_seeds);
  for (std::size_t s = 0; s < spec.n_seeds; ++s) {
    PhantomSpec ps = spec.phantom;
    ps.seed = run_seed(spec, s);
    phantoms[s] = generate_phantom(ps);
    masks[s].push_back(make_mask(dims.nx, dims.ny, spec.first_frame_rate, spec.density_falloff,
                                 mask_seed(ps.seed, 0), layers));
    for (std::size_t r = 0; r < spec.rates.size(); ++r)
      masks[s].push_back(make_mask(dims.nx, dims.ny, spec.rates[r], spec.density_falloff,
                                   mask_seed(ps.seed, r + 1), layers));
  }

  std::vector<Cell> cells;
  for (const auto solver : spec.solvers)
    for (std::size_t r = 0; r < spec.rates.size(); ++r)
      for (std::size_t s = 0; s < spec.n_seeds; ++s) cells.push_back({solver, r, s});

  std::vector<CellOutput> outputs(cells.size());
  auto run_cell = [&](std::size_t c) {
    const Cell& cell = cells[c];
    const auto& frames = phantoms[cell.seed_index];
    const double rate = spec.rates[cell.rate_index];
    std::vector<KSpaceData> data;
    data.reserve(frames.size());
    for (std::size_t t = 0; t < frames.size(); ++t)
      data.push_back(acquire(frames[t].x, masks[cell.seed_index][t == 0 ? 0 : cell.rate_index + 1]));

    const auto start = std::chrono::steady_clock::now();
    const auto mode =
        cell.solver == SolverId::kLs ? SequenceMode::kBaseline : SequenceMode::kPriori;
    const auto results = solve_sequence(data, spec.ls,
                                        cell.solver == SolverId::kLs ? spec.ls : spec.priori, mode);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    auto& rows = outputs[c].rows;
    for (std::size_t t = 0; t < results.size(); ++t) {
      SweepRow row;
      row.solver = cell.solver;
      row.rate = rate;
      row.frame_rate = t == 0 ? spec.first_frame_rate : rate;
      row.seed = run_seed(spec, cell.seed_index);
      row.frame = t;
      row.psnr = psnr(frames[t].x.data(), results[t].decomposition.sum());
      row.iterations = results[t].iterations;
      row.converged = results[t].converged;
      row.wall_seconds = wall / static_cast<double>(results.size());
      rows.push_back(row);
    }
  };

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t c = next++; c < cells.size(); c = next++) {
      try {
        run_cell(c);
      } catch (...) {
        outputs[c].error = std::current_exception();
      }
    }
  };
  const std::size_t n_workers = std::min(spec.threads, cells.size());
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < n_workers; ++i) pool.emplace_back(worker);
  }

  // Report the first failure in grid order, independent of scheduling.
  for (std::size_t c = 0; c < cells.size(); ++c) {
    if (!outputs[c].error) continue;
    const Cell& cell = cells[c];
    const std::string where = "solver " + to_string(cell.solver) + ", rate " +
                              fixed6(spec.rates[cell.rate_index]) + ", seed " +
                              std::to_string(run_seed(spec, cell.seed_index));
    try {
      std::rethrow_exception(outputs[c].error);
    } catch (const FrameError& e) {
      std::string cause = e.what();
      try {
        if (e.cause()) std::rethrow_exception(e.cause());
      } catch (const std::exception& inner) {
        cause = inner.what();
      }
      throw FrameError(e.frame(), where + ": " + cause, e.cause());
    } catch (const Error& e) {
      throw Error(where + ": " + e.what());
    }
  }

  SweepResult result;
  for (auto& out : outputs)
    result.rows.insert(result.rows.end(), out.rows.begin(), out.rows.end());
  std::sort(result.rows.begin(), result.rows.end(), [](const SweepRow& a, const SweepRow& b) {
    return std::tie(a.solver, a.rate, a.seed, a.frame) < std::tie(b.solver, b.rate, b.seed, b.frame);
  });

  for (const auto solver : spec.solvers) {
    for (const double rate : spec.rates) {
      SummaryRow row{solver, rate, 0.0, 0};
      for (const auto& r : result.rows)
        if (r.solver == solver && r.rate == rate && r.frame >= 1) {
          row.mean_psnr += r.psnr;
          ++row.samples;
        }
      if (row.samples > 0) row.mean_psnr /= static_cast<double>(row.samples);
      result.summary.push_back(row);
    }
  }
  std::sort(result.summary.begin(), result.summary.end(),
            [](const SummaryRow& a, const SummaryRow& b) {
              return std::tie(a.solver, a.rate) < std::tie(b.solver, b.rate);
            });
  return result;
}

std::string format_sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << "solver,rate,frame_rate,seed,frame,psnr_db,iterations,converged\n";
  for (const auto& r : rows)
    os << to_string(r.solver) << ',' << fixed6(r.rate) << ',' << fixed6(r.frame_rate) << ','
       << r.seed << ',' << r.frame << ',' << fixed6(r.psnr) << ',' << r.iterations << ','
       << (r.converged ? 1 : 0) << '\n';
  return os.str();
}

std::string format_summary_csv(const std::vector<SummaryRow>& rows) {
  std::ostringstream os;
  os << "solver,rate,mean_psnr_db,frames\n";
  for (const auto& r : rows)
    os << to_string(r.solver) << ',' << fixed6(r.rate) << ',' << fixed6(r.mean_psnr) << ','
       << r.samples << '\n';
  return os.str();
}

SweepResult run_sweep_to_disk(const ExperimentSpec& spec) {
  spec.validate();
  std::error_code ec;
  std::filesystem::create_directories(spec.output_dir, ec);
  if (ec) throw IoError("cannot create '" + spec.output_dir.string() + "': " + ec.message());

  const auto open = [&](const char* name) {
    std::ofstream os(spec.output_dir / name, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot write '" + (spec.output_dir / name).string() + "'");
    return os;
  };

  auto log = open("run.log");
  log << timestamp() << " sweep started: " << spec.solvers.size() << " solvers x "
      << spec.rates.size() << " rates x " << spec.n_seeds << " seeds, " << spec.threads
      << " threads\n";
  log.flush();
  const auto start = std::chrono::steady_clock::now();
  SweepResult result;
  try {
    result = run_sweep(spec);
  } catch (const std::exception& e) {
    log << timestamp() << " sweep failed: " << e.what() << '\n';
    throw;
  }
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  auto sweep_csv = open("sweep.csv");
  sweep_csv << format_sweep_csv(result.rows);
  auto summary_csv = open("summary.csv");
  summary_csv << format_summary_csv(result.summary);
  if (!sweep_csv || !summary_csv) throw IoError("failed writing sweep outputs");

  for (const auto& r : result.rows)
    if (r.frame == 0)
      log << "  " << to_string(r.solver) << " rate " << fixed6(r.rate) << " seed " << r.seed
          << ": " << fixed6(r.wall_seconds) << " s/frame\n";
  log << timestamp() << " sweep finished in " << fixed6(wall) << " s\n";
  return result;
}

}  // namespace lps
