// Command-line harness: reproducible dataset generation, training, fusion
// evaluation, gamma sweeps, and the theory verification suite.
//
// Exit codes: 0 success, 1 usage/config error, 2 numerical failure,
// 3 verification failure.

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "jacfuse/datagen.hpp"
#include "jacfuse/errors.hpp"
#include "jacfuse/experiment.hpp"
#include "jacfuse/mlp.hpp"
#include "jacfuse/rng.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitVerifyFailed = 3;

struct CommonArgs {
  std::string config_path;
  std::string out_dir = ".";
  bool has_seed = false;
  std::uint64_t seed = 0;
  bool has_trials = false;
  std::size_t trials = 0;
  std::vector<double> gammas;
  std::vector<std::string> perturbs;
  bool quick = false;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool wants_config) {
  auto* cfg = cmd->add_option("--config", args.config_path, "Experiment config file");
  if (wants_config) cfg->required();
  cmd->add_option("--out", args.out_dir, "Output directory");
  cmd->add_option("--seed", args.seed, "Base RNG seed (overrides config)")
      ->each([&args](const std::string&) { args.has_seed = true; });
  cmd->add_option("--trials", args.trials, "Number of trials (overrides config)")
      ->each([&args](const std::string&) { args.has_trials = true; });
  cmd->add_option("--gamma", args.gammas, "Gamma values (overrides config)");
  cmd->add_option("--perturb", args.perturbs,
                  "Perturbation spec KIND:params (overrides config)");
  cmd->add_flag("--quick", args.quick, "Reduce trial counts tenfold");
}

// Config-level problems (parse errors, invalid value combinations) are usage
// errors; anything thrown later during computation is a numerical failure.
jacfuse::ExperimentConfig load_config(const CommonArgs& args) {
  try {
    jacfuse::ExperimentConfig cfg;
    if (!args.config_path.empty()) {
      cfg = jacfuse::ExperimentConfig::parse_file(args.config_path);
    } else {
      cfg.perturbs.push_back(jacfuse::PerturbSpec::parse("gaussian:omega0=1.0"));
    }
    if (args.has_seed) cfg.seed = args.seed;
    if (args.has_trials) cfg.trials = args.trials;
    if (!args.gammas.empty()) cfg.gammas = args.gammas;
    if (!args.perturbs.empty()) {
      cfg.perturbs.clear();
      for (const auto& spec : args.perturbs) {
        cfg.perturbs.push_back(jacfuse::PerturbSpec::parse(spec));
      }
    }
    if (args.quick) cfg.trials = std::max<std::size_t>(1, cfg.trials / 10);
    cfg.validate();
    return cfg;
  } catch (const jacfuse::DomainError& e) {
    throw jacfuse::ParseError(e.what());
  }
}

int cmd_gen_data(const CommonArgs& args) {
  const jacfuse::ExperimentConfig cfg = load_config(args);
  jacfuse::MultimodalDataset data;
  if (cfg.dataset == "two_moons") {
    data = jacfuse::two_moons(cfg.n, cfg.jitter, jacfuse::derive_seed(cfg.seed, 1));
  } else {
    data = jacfuse::gaussian_blobs(cfg.n, cfg.blobs_k, cfg.dim_a, cfg.dim_b,
                                   cfg.separation, jacfuse::derive_seed(cfg.seed, 1));
  }
  fs::create_directories(args.out_dir);
  const fs::path path = fs::path(args.out_dir) / "dataset.txt";
  jacfuse::save_dataset(data, path);
  std::cout << "wrote " << path.string() << " (" << data.size() << " samples, k="
            << data.num_classes << ")\n";
  return kExitOk;
}

int cmd_train(const CommonArgs& args) {
  const jacfuse::ExperimentConfig cfg = load_config(args);
  jacfuse::MultimodalDataset data;
  if (!cfg.data_file.empty()) {
    data = jacfuse::load_dataset(cfg.data_file);
  } else if (cfg.dataset == "two_moons") {
    data = jacfuse::two_moons(cfg.n, cfg.jitter, jacfuse::derive_seed(cfg.seed, 1));
  } else {
    data = jacfuse::gaussian_blobs(cfg.n, cfg.blobs_k, cfg.dim_a, cfg.dim_b,
                                   cfg.separation, jacfuse::derive_seed(cfg.seed, 1));
  }
  const auto [train_set, test_set] =
      jacfuse::split_train_test(data, cfg.train_fraction, jacfuse::derive_seed(cfg.seed, 2));

  fs::create_directories(args.out_dir);
  const auto fit = [&](const jacfuse::LabeledDataset& part, std::uint64_t init_stream,
                       std::uint64_t train_stream, const std::string& filename) {
    std::vector<std::size_t> dims;
    dims.push_back(part.x[0].size());
    dims.insert(dims.end(), cfg.hidden.begin(), cfg.hidden.end());
    dims.push_back(part.num_classes);
    jacfuse::MlpModel model = jacfuse::MlpModel::init(
        dims, jacfuse::derive_seed(cfg.seed, init_stream), cfg.train.weight_init_scale);
    jacfuse::TrainConfig tc = cfg.train;
    tc.seed = jacfuse::derive_seed(cfg.seed, train_stream);
    model = jacfuse::train(std::move(model), part, tc);
    const fs::path path = fs::path(args.out_dir) / filename;
    jacfuse::save_model(model, path);
    std::cout << "wrote " << path.string() << " (train acc "
              << jacfuse::accuracy(model, part) << ")\n";
  };
  fit(train_set.modality_a(), 3, 4, "model_a.txt");
  fit(train_set.modality_b(), 5, 6, "model_b.txt");
  return kExitOk;
}

int cmd_eval(const CommonArgs& args) {
  const jacfuse::ExperimentConfig cfg = load_config(args);
  const jacfuse::ResultRecord record = jacfuse::run_eval(cfg);
  fs::create_directories(args.out_dir);
  const fs::path json_path = fs::path(args.out_dir) / "results.json";
  const fs::path csv_path = fs::path(args.out_dir) / "results.csv";
  jacfuse::write_eval_json(record, json_path);
  jacfuse::write_eval_csv(record, csv_path);
  std::cout << "wrote " << json_path.string() << " and " << csv_path.string() << "\n";
  for (const auto& row : record.rows) {
    std::cout << row.method << " gamma=" << row.gamma << " perturb=" << row.perturb
              << " clean=" << row.clean_mean << " noisy=" << row.noisy_mean << "\n";
  }
  return kExitOk;
}

int cmd_sweep_gamma(const CommonArgs& args) {
  const jacfuse::ExperimentConfig cfg = load_config(args);
  const std::vector<jacfuse::SweepRow> rows = jacfuse::run_sweep(cfg);
  fs::create_directories(args.out_dir);
  const fs::path path = fs::path(args.out_dir) / "sweep.csv";
  jacfuse::write_sweep_csv(rows, path);
  std::cout << "wrote " << path.string() << " (" << rows.size() << " rows)\n";
  return kExitOk;
}

int cmd_verify(const CommonArgs& args, const std::string& mutate) {
  jacfuse::VerifyOptions opts;
  opts.quick = args.quick;
  if (args.has_seed) opts.seed = args.seed;
  if (mutate == "jacobian-sign") {
    opts.jacobian_sign = -1;
  } else if (!mutate.empty()) {
    std::cerr << "error: unknown mutation '" << mutate << "'\n";
    return kExitUsage;
  }
  const std::vector<jacfuse::CheckResult> results = jacfuse::run_verify(opts);
  bool all_pass = true;
  for (const auto& check : results) {
    std::cout << (check.pass ? "[PASS] " : "[FAIL] ") << check.name << ": " << check.detail
              << "\n";
    all_pass = all_pass && check.pass;
  }
  std::cout << (all_pass ? "verification passed" : "verification FAILED") << "\n";
  return all_pass ? kExitOk : kExitVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Training-free robust late fusion toolkit"};
  app.require_subcommand(1);

  CommonArgs gen_args, train_args, eval_args, sweep_args, verify_args;
  std::string mutate;

  CLI::App* gen = app.add_subcommand("gen-data", "Generate a multimodal dataset file");
  add_common(gen, gen_args, false);
  CLI::App* tr = app.add_subcommand("train", "Train the per-modality classifiers");
  add_common(tr, train_args, true);
  CLI::App* ev = app.add_subcommand("eval", "Evaluate fusion methods under perturbations");
  add_common(ev, eval_args, true);
  CLI::App* sw = app.add_subcommand("sweep-gamma", "Accuracy vs magnitude per gamma");
  add_common(sw, sweep_args, true);
  CLI::App* vf = app.add_subcommand("verify", "Run the theory verification suite");
  add_common(vf, verify_args, false);
  vf->add_option("--mutate", mutate, "CI mutation mode (jacobian-sign)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (gen->parsed()) return cmd_gen_data(gen_args);
    if (tr->parsed()) return cmd_train(train_args);
    if (ev->parsed()) return cmd_eval(eval_args);
    if (sw->parsed()) return cmd_sweep_gamma(sweep_args);
    if (vf->parsed()) return cmd_verify(verify_args, mutate);
  } catch (const jacfuse::ParseError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const jacfuse::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const jacfuse::Error& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitUsage;
}
