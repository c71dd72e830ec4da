// Command-line front end. Talks to the library only through the C API.
#include "lps/lps.h"

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

// Library failure; carries the frame index when there is one.
struct Failure {
  lps_status status;
  std::string message;
};

struct UsageError {
  std::string message;
};

void check(lps_status status) {
  if (status != LPS_OK) throw Failure{status, lps_last_error()};
}

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

Volume load_volume(const std::string& path) {
  lps_volume* v = nullptr;
  check(lps_volume_load(path.c_str(), &v));
  return Volume(v);
}

Mask load_mask(const std::string& path) {
  lps_mask* m = nullptr;
  check(lps_mask_load(path.c_str(), &m));
  return Mask(m);
}

void save(const lps_volume* v, const fs::path& path) { check(lps_volume_save(v, path.c_str())); }

// Options shared by every command that reads settings.
struct SettingsOptions {
  std::string config;
  std::vector<std::string> overrides;  // section.key=value

  void add_to(CLI::App* cmd) {
    cmd->add_option("-c,--config", config, "Config file ([phantom], [solver.ls], ...)")
        ->check(CLI::ExistingFile);
    cmd->add_option("--set", overrides, "Override a config value: section.key=value");
  }

  Settings build(const std::vector<std::pair<std::string, std::string>>& extra = {}) const {
    lps_settings* s = nullptr;
    if (config.empty()) check(lps_settings_create(&s));
    else check(lps_settings_load(config.c_str(), &s));
    Settings settings(s);
    auto apply = [&](const std::string& dotted, const std::string& value) {
      const auto dot = dotted.rfind('.');
      if (dot == std::string::npos || dot == 0 || dot + 1 == dotted.size())
        throw UsageError("expected section.key, got '" + dotted + "'");
      check(lps_settings_set(s, dotted.substr(0, dot).c_str(), dotted.substr(dot + 1).c_str(),
                             value.c_str()));
    };
    for (const auto& item : overrides) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw UsageError("--set expects section.key=value, got '" + item + "'");
      apply(item.substr(0, eq), item.substr(eq + 1));
    }
    for (const auto& [key, value] : extra) apply(key, value);
    check(lps_settings_validate(s));
    return settings;
  }
};

std::string format_double(double v, int precision = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

fs::path component_path(const std::string& prefix, const char* suffix) {
  return fs::path(prefix + suffix);
}

void write_components(const lps_results* r, std::size_t index, const std::string& prefix) {
  const std::pair<lps_component, const char*> parts[] = {
      {LPS_COMPONENT_X, ".x"}, {LPS_COMPONENT_L, ".l"}, {LPS_COMPONENT_S, ".s"}};
  for (const auto& [which, suffix] : parts) {
    lps_volume* v = nullptr;
    check(lps_results_component(r, index, which, &v));
    Volume owned(v);
    save(owned.get(), component_path(prefix, suffix));
  }
}

std::string frame_prefix(const std::string& prefix, std::size_t t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "_%03zu", t);
  return prefix + buf;
}

void ensure_parent(const std::string& prefix) {
  const auto parent = fs::path(prefix).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

// frame,iterations,converged,data_residual[,psnr_db]
std::string metrics_row(const lps_results* r, std::size_t index, const lps_volume* reference) {
  lps_result_info info{};
  check(lps_results_info(r, index, &info));
  std::ostringstream os;
  os << index << ',' << info.iterations << ',' << info.converged << ','
     << format_double(info.data_residual, 9);
  if (reference) {
    lps_volume* est = nullptr;
    check(lps_results_component(r, index, LPS_COMPONENT_X, &est));
    Volume owned(est);
    double value = 0.0;
    check(lps_psnr(reference, owned.get(), &value));
    os << ',' << format_double(value);
  }
  return os.str();
}

const char* metrics_header(bool with_psnr) {
  return with_psnr ? "frame,iterations,converged,data_residual,psnr_db"
                   : "frame,iterations,converged,data_residual";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Low-rank plus sparse reconstruction of undersampled dynamic volumes"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  // phantom gen
  auto* phantom = app.add_subcommand("phantom", "Synthetic dynamic phantoms");
  phantom->require_subcommand(1);
  auto* phantom_gen = phantom->add_subcommand("gen", "Write phantom frames and ground truth");
  SettingsOptions phantom_settings;
  phantom_settings.add_to(phantom_gen);
  std::string phantom_prefix;
  std::int64_t phantom_seed = -1;
  phantom_gen->add_option("-o,--out", phantom_prefix, "Output prefix; writes <prefix>_NNN.{x,l,s}")
      ->required();
  phantom_gen->add_option("--seed", phantom_seed, "Phantom seed")->check(CLI::NonNegativeNumber);

  // mask gen
  auto* mask = app.add_subcommand("mask", "Sampling masks");
  mask->require_subcommand(1);
  auto* mask_gen = mask->add_subcommand("gen", "Write a variable-density mask");
  std::size_t mask_nx = 32, mask_ny = 32, mask_layers = 1;
  double mask_rate = 0.0, mask_falloff = 2.0;
  std::uint64_t mask_seed = 1;
  std::string mask_out;
  mask_gen->add_option("--nx", mask_nx, "Grid width")->check(CLI::PositiveNumber);
  mask_gen->add_option("--ny", mask_ny, "Grid height")->check(CLI::PositiveNumber);
  mask_gen->add_option("--rate", mask_rate, "Sampling rate in (0, 1]")->required();
  mask_gen->add_option("--falloff", mask_falloff, "Density falloff exponent");
  mask_gen->add_option("--seed", mask_seed, "Seed");
  mask_gen->add_option("--layers", mask_layers, "1 (shared) or the slice count")
      ->check(CLI::PositiveNumber);
  mask_gen->add_option("-o,--out", mask_out, "Output .lpsm file")->required();

  // recon
  auto* recon = app.add_subcommand("recon", "Acquire one volume through a mask and reconstruct it");
  SettingsOptions recon_settings;
  recon_settings.add_to(recon);
  std::string recon_input, recon_mask, recon_out, recon_reference;
  recon->add_option("-i,--input", recon_input, "Volume to acquire")->required()->check(CLI::ExistingFile);
  recon->add_option("-m,--mask", recon_mask, "Mask file")->required()->check(CLI::ExistingFile);
  recon->add_option("-o,--out", recon_out, "Output prefix; writes <prefix>.{x,l,s}")->required();
  recon->add_option("-r,--reference", recon_reference, "Reference for PSNR (default: the input)")
      ->check(CLI::ExistingFile);

  // recon-seq
  auto* recon_seq = app.add_subcommand("recon-seq", "Reconstruct a sequence of volumes");
  SettingsOptions seq_settings;
  seq_settings.add_to(recon_seq);
  std::vector<std::string> seq_inputs, seq_masks, seq_references;
  std::string seq_out, seq_metrics, seq_solver = "priori-ls";
  recon_seq->add_option("-i,--inputs", seq_inputs, "Volumes, in time order")
      ->required()
      ->check(CLI::ExistingFile);
  recon_seq->add_option("-m,--masks", seq_masks,
                        "One mask for all frames, two (first frame, later frames) or one per frame")
      ->required()
      ->check(CLI::ExistingFile);
  recon_seq->add_option("-r,--references", seq_references, "References for PSNR (default: inputs)")
      ->check(CLI::ExistingFile);
  recon_seq->add_option("--solver", seq_solver, "ls or priori-ls")
      ->check(CLI::IsMember({"ls", "priori-ls"}));
  recon_seq->add_option("-o,--out", seq_out, "Output prefix; writes <prefix>_NNN.{x,l,s}")->required();
  recon_seq->add_option("--metrics", seq_metrics, "CSV file for per-frame metrics (default: stdout)");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "PSNR over sampling rates, seeds and solvers");
  SettingsOptions sweep_settings;
  sweep_settings.add_to(sweep);
  std::string sweep_out, sweep_rates, sweep_solvers;
  std::size_t sweep_seeds = 0, sweep_threads = 0;
  sweep->add_option("-o,--out", sweep_out, "Output directory (default: [sweep] output_dir)");
  sweep->add_option("--rates", sweep_rates, "Comma-separated rates, e.g. 1/7,1/5,1/3");
  sweep->add_option("--solvers", sweep_solvers, "Comma-separated subset of ls,priori-ls");
  sweep->add_option("--seeds", sweep_seeds, "Number of seeds")->check(CLI::PositiveNumber);
  sweep->add_option("-j,--threads", sweep_threads, "Worker threads")->check(CLI::PositiveNumber);

  // eval
  auto* eval = app.add_subcommand("eval", "PSNR of an estimate against a reference");
  std::string eval_reference, eval_estimate;
  eval->add_option("reference", eval_reference, "Reference volume")->required()->check(CLI::ExistingFile);
  eval->add_option("estimate", eval_estimate, "Estimated volume")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (phantom_gen->parsed()) {
      std::vector<std::pair<std::string, std::string>> extra;
      if (phantom_seed >= 0) extra.emplace_back("phantom.seed", std::to_string(phantom_seed));
      const auto settings = phantom_settings.build(extra);
      lps_phantom* p = nullptr;
      check(lps_phantom_generate(settings.get(), &p));
      Phantom owned(p);
      ensure_parent(phantom_prefix);
      const std::pair<lps_component, const char*> parts[] = {
          {LPS_COMPONENT_X, ".x"}, {LPS_COMPONENT_L, ".l"}, {LPS_COMPONENT_S, ".s"}};
      const std::size_t n = lps_phantom_frames(owned.get());
      for (std::size_t t = 0; t < n; ++t) {
        for (const auto& [which, suffix] : parts) {
          lps_volume* v = nullptr;
          check(lps_phantom_component(owned.get(), t, which, &v));
          Volume vol(v);
          save(vol.get(), component_path(frame_prefix(phantom_prefix, t), suffix));
        }
      }
      std::cout << "wrote " << n << " frames to " << phantom_prefix << "_NNN.{x,l,s}\n";
    } else if (mask_gen->parsed()) {
      lps_mask* m = nullptr;
      check(lps_mask_generate(mask_nx, mask_ny, mask_rate, mask_falloff, mask_seed, mask_layers, &m));
      Mask owned(m);
      ensure_parent(mask_out);
      check(lps_mask_save(owned.get(), mask_out.c_str()));
      std::size_t count = 0;
      check(lps_mask_info(owned.get(), nullptr, nullptr, nullptr, &count));
      std::cout << "wrote " << mask_out << ": " << count << " samples per layer\n";
    } else if (recon->parsed()) {
      const auto settings = recon_settings.build();
      const auto input = load_volume(recon_input);
      const auto m = load_mask(recon_mask);
      const auto reference = recon_reference.empty() ? Volume() : load_volume(recon_reference);
      lps_kspace* y = nullptr;
      check(lps_acquire(input.get(), m.get(), &y));
      KSpace data(y);
      lps_results* r = nullptr;
      check(lps_solve(data.get(), settings.get(), &r));
      Results results(r);
      ensure_parent(recon_out);
      write_components(results.get(), 0, recon_out);
      std::cout << metrics_header(true) << '\n'
                << metrics_row(results.get(), 0, reference ? reference.get() : input.get())
                << '\n';
    } else if (recon_seq->parsed()) {
      const std::size_t n = seq_inputs.size();
      if (seq_masks.size() != 1 && seq_masks.size() != 2 && seq_masks.size() != n)
        throw UsageError("--masks takes 1, 2 or " + std::to_string(n) + " (one per input) files, got " +
                         std::to_string(seq_masks.size()));
      if (!seq_references.empty() && seq_references.size() != n)
        throw UsageError("--references must list one file per input");
      const auto settings = seq_settings.build();

      std::vector<Volume> inputs;
      std::vector<Mask> masks;
      for (const auto& path : seq_inputs) inputs.push_back(load_volume(path));
      for (const auto& path : seq_masks) masks.push_back(load_mask(path));
      std::vector<KSpace> data;
      std::vector<const lps_kspace*> frames;
      for (std::size_t t = 0; t < n; ++t) {
        const std::size_t mi = masks.size() == 1 ? 0 : masks.size() == 2 ? (t == 0 ? 0 : 1) : t;
        lps_kspace* y = nullptr;
        const auto status = lps_acquire(inputs[t].get(), masks[mi].get(), &y);
        if (status != LPS_OK)
          throw Failure{status, std::string(lps_last_error()) + " (failing frame index " +
                                    std::to_string(t) + ")"};
        data.emplace_back(y);
        frames.push_back(y);
      }

      const lps_solver solver = seq_solver == "ls" ? LPS_SOLVER_LS : LPS_SOLVER_PRIORI_LS;
      if (solver == LPS_SOLVER_PRIORI_LS && n == 1)
        std::clog << "note: frame 0 has no prior; solving it with ls\n";
      lps_results* r = nullptr;
      std::size_t failed = SIZE_MAX;
      const auto status =
          lps_solve_sequence(frames.data(), frames.size(), settings.get(), solver, &r, &failed);
      if (status != LPS_OK) {
        std::string message = lps_last_error();
        if (failed != SIZE_MAX) message += " (failing frame index " + std::to_string(failed) + ")";
        throw Failure{status, message};
      }
      Results results(r);

      std::vector<Volume> references;
      for (const auto& path : seq_references) references.push_back(load_volume(path));
      ensure_parent(seq_out);
      std::ostringstream metrics;
      metrics << metrics_header(true) << '\n';
      for (std::size_t t = 0; t < n; ++t) {
        write_components(results.get(), t, frame_prefix(seq_out, t));
        const lps_volume* ref = references.empty() ? inputs[t].get() : references[t].get();
        metrics << metrics_row(results.get(), t, ref) << '\n';
      }
      if (seq_metrics.empty()) {
        std::cout << metrics.str();
      } else {
        std::ofstream os(seq_metrics, std::ios::binary | std::ios::trunc);
        os << metrics.str();
        if (!os) throw Failure{LPS_ERR_IO, "cannot write '" + seq_metrics + "'"};
      }
    } else if (sweep->parsed()) {
      std::vector<std::pair<std::string, std::string>> extra;
      if (!sweep_rates.empty()) extra.emplace_back("sweep.rates", sweep_rates);
      if (!sweep_solvers.empty()) extra.emplace_back("sweep.solvers", sweep_solvers);
      if (sweep_seeds > 0) extra.emplace_back("sweep.seeds", std::to_string(sweep_seeds));
      if (sweep_threads > 0) extra.emplace_back("sweep.threads", std::to_string(sweep_threads));
      if (!sweep_out.empty()) extra.emplace_back("sweep.output_dir", sweep_out);
      const auto settings = sweep_settings.build(extra);
      std::size_t failed = SIZE_MAX;
      const auto status = lps_sweep_run(settings.get(), nullptr, &failed);
      if (status != LPS_OK) {
        std::string message = lps_last_error();
        if (failed != SIZE_MAX) message += " (failing frame index " + std::to_string(failed) + ")";
        throw Failure{status, message};
      }
      // Echo the summary so the result is visible without opening files.
      const char* dir = nullptr;
      check(lps_settings_get(settings.get(), "sweep", "output_dir", &dir));
      std::ifstream summary(fs::path(dir ? dir : ".") / "summary.csv");
      if (summary) std::cout << summary.rdbuf();
    } else if (eval->parsed()) {
      const auto reference = load_volume(eval_reference);
      const auto estimate = load_volume(eval_estimate);
      double value = 0.0;
      check(lps_psnr(reference.get(), estimate.get(), &value));
      std::cout << format_double(value) << '\n';
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.message << '\n';
    return kExitUsage;
  } catch (const Failure& e) {
    std::cerr << "error (" << lps_status_name(e.status) << "): " << e.message << '\n';
    return kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return 0;
}
