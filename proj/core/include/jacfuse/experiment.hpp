#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "jacfuse/mlp.hpp"
#include "jacfuse/perturb.hpp"

namespace jacfuse {

// Full description of one reproducible experiment, parsed from a flat
// key-value config file with [section] headers (see README for the format).
struct ExperimentConfig {
  // [data]
  std::string dataset = "two_moons";  // two_moons | gaussian_blobs
  std::size_t n = 2000;
  double jitter = 0.1;
  std::size_t blobs_k = 3;
  std::size_t dim_a = 4;
  std::size_t dim_b = 4;
  double separation = 3.0;
  std::string data_file;  // when set, load instead of generating per trial
  double train_fraction = 0.8;

  // [model]
  std::vector<std::size_t> hidden = {16, 16};
  TrainConfig train;
  std::string model_a_file;  // when set, load instead of training per trial
  std::string model_b_file;

  // [fusion]
  std::vector<std::string> methods = {"stat", "stat+jacreg"};
  std::vector<double> gammas = {1.0};
  std::size_t t_max = 1;
  std::string regularize = "auto";  // a | b | both | auto (= perturbed side)

  // [perturb]
  std::vector<PerturbSpec> perturbs;
  char perturb_modality = 'b';

  // [sweep]
  std::string sweep_base = "gaussian";
  std::vector<double> magnitudes;

  // [run]
  std::size_t trials = 1;
  std::uint64_t seed = 0;

  void validate() const;
  static ExperimentConfig parse(std::istream& in, const std::string& name);
  static ExperimentConfig parse_file(const std::filesystem::path& path);
};

// One aggregated line of cmd_eval output: accuracies are means/sample-stds
// over trials; jac_norm_sq_mean averages ||J W_m W_M||_F^2 over every
// recalibration performed for the row (NaN for rows without one); bound is
// gamma*K/(2*(1-gamma)) (infinity when gamma = 1).
struct ResultRow {
  std::string method;
  double gamma = 1.0;
  std::string perturb;
  double clean_mean = 0.0;
  double clean_std = 0.0;
  double noisy_mean = 0.0;
  double noisy_std = 0.0;
  double jac_norm_sq_mean = 0.0;
  double bound = 0.0;
};

struct ResultRecord {
  ExperimentConfig config;
  std::vector<ResultRow> rows;  // sorted by (method, gamma, perturb)
};

ResultRecord run_eval(const ExperimentConfig& cfg);

// Serialized record; the timestamp field is optional so byte-level result
// comparison can exclude it.
std::string eval_json_string(const ResultRecord& record, bool include_timestamp);
void write_eval_json(const ResultRecord& record, const std::filesystem::path& path,
                     bool include_timestamp = true);
void write_eval_csv(const ResultRecord& record, const std::filesystem::path& path);

// Accuracy-vs-magnitude sweep: one row per (method, gamma, magnitude).
struct SweepRow {
  std::string method;
  double gamma = 1.0;
  double magnitude = 0.0;
  std::string perturb;
  double acc_mean = 0.0;
  double acc_std = 0.0;
};

std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg);
void write_sweep_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path);

// Theory/identity verification suite (the `verify` subcommand).
struct VerifyOptions {
  bool quick = false;          // divide trial counts by ten
  int jacobian_sign = +1;      // -1 injects the sign-error mutation (CI mode)
  std::uint64_t seed = 0x76657269ULL;
};

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

std::vector<CheckResult> run_verify(const VerifyOptions& opts);

}  // namespace jacfuse
