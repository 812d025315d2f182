#include "jacfuse/experiment.hpp"

#include <cmath>
#include <sstream>

#include <doctest.h>

#include "jacfuse/errors.hpp"

using namespace jacfuse;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.n = 240;
  cfg.jitter = 0.1;
  cfg.hidden = {8};
  cfg.train.epochs = 25;
  cfg.trials = 2;
  cfg.seed = 7;
  cfg.methods = {"stat", "stat+jacreg"};
  cfg.gammas = {1.0};
  cfg.perturbs = {PerturbSpec::parse("gaussian:omega0=1.0")};
  return cfg;
}

}  // namespace

TEST_CASE("config parsing") {
  std::istringstream in(R"(# comment
[data]
dataset = two_moons
n = 500
jitter = 0.2

[model]
hidden = 8 8
epochs = 30
learning_rate = 0.05

[fusion]
methods = stat stat+jacreg mean
gammas = 1.0 0.5 0.1
t_max = 2

[perturb]
spec = gaussian:omega0=2.0
spec = fgsm:omega4=0.1
modality = b

[run]
trials = 3
seed = 99
)");
  const ExperimentConfig cfg = ExperimentConfig::parse(in, "test.ini");
  CHECK(cfg.n == 500);
  CHECK(cfg.jitter == doctest::Approx(0.2));
  CHECK(cfg.hidden == std::vector<std::size_t>{8, 8});
  CHECK(cfg.train.epochs == 30);
  CHECK(cfg.train.learning_rate == doctest::Approx(0.05));
  CHECK(cfg.methods.size() == 3);
  CHECK(cfg.gammas.size() == 3);
  CHECK(cfg.t_max == 2);
  CHECK(cfg.perturbs.size() == 2);
  CHECK(cfg.perturbs[1].kind == PerturbKind::kFgsm);
  CHECK(cfg.trials == 3);
  CHECK(cfg.seed == 99);
}

TEST_CASE("config parse errors carry line context") {
  auto parse_text = [](const std::string& text) {
    std::istringstream in(text);
    return ExperimentConfig::parse(in, "bad.ini");
  };
  CHECK_THROWS_WITH_AS(parse_text("[data]\nbogus = 1\n"),
                       doctest::Contains("bad.ini:2"), ParseError);
  CHECK_THROWS_WITH_AS(parse_text("[nope]\n"), doctest::Contains("bad.ini:1"), ParseError);
  CHECK_THROWS_WITH_AS(parse_text("[data]\nn = abc\n"), doctest::Contains("bad.ini:2"),
                       ParseError);
  CHECK_THROWS_WITH_AS(parse_text("x = 1\n"), doctest::Contains("outside"), ParseError);
  CHECK_THROWS_AS(parse_text("[fusion]\nmethods = magic\n"), DomainError);
}

TEST_CASE("gamma=1 rows for stat and stat+jacreg are identical") {
  const ResultRecord record = run_eval(small_config());
  REQUIRE(record.rows.size() == 2);
  const ResultRow* stat = nullptr;
  const ResultRow* jac = nullptr;
  for (const auto& row : record.rows) {
    if (row.method == "stat") stat = &row;
    if (row.method == "stat+jacreg") jac = &row;
  }
  REQUIRE(stat != nullptr);
  REQUIRE(jac != nullptr);
  CHECK(std::abs(stat->clean_mean - jac->clean_mean) <= 1e-12);
  CHECK(std::abs(stat->noisy_mean - jac->noisy_mean) <= 1e-12);
  CHECK(stat->perturb == "gaussian:omega0=1");
}

TEST_CASE("eval JSON is byte-identical across runs, timestamp aside") {
  const ExperimentConfig cfg = small_config();
  const ResultRecord a = run_eval(cfg);
  const ResultRecord b = run_eval(cfg);
  CHECK(eval_json_string(a, false) == eval_json_string(b, false));
}

TEST_CASE("sweep emits one row per (method, gamma, magnitude)") {
  ExperimentConfig cfg = small_config();
  cfg.methods = {"stat", "stat+jacreg"};
  cfg.gammas = {1.0, 0.5};
  cfg.sweep_base = "gaussian";
  cfg.magnitudes = {0.5, 1.0, 2.0};
  cfg.trials = 1;
  const std::vector<SweepRow> rows = run_sweep(cfg);
  CHECK(rows.size() == 2 * 2 * 3);

  // gamma = 1 curve of stat+jacreg equals the trivial-fusion curve.
  for (double magnitude : cfg.magnitudes) {
    double stat_acc = -1.0, jac_acc = -2.0;
    for (const auto& row : rows) {
      if (row.magnitude != magnitude || row.gamma != 1.0) continue;
      if (row.method == "stat") stat_acc = row.acc_mean;
      if (row.method == "stat+jacreg") jac_acc = row.acc_mean;
    }
    CHECK(stat_acc == doctest::Approx(jac_acc).epsilon(1e-12));
  }
}

TEST_CASE("verify suite passes and the jacobian-sign mutation is caught") {
  VerifyOptions opts;
  opts.quick = true;
  const std::vector<CheckResult> clean = run_verify(opts);
  for (const auto& check : clean) {
    INFO(check.name, ": ", check.detail);
    CHECK(check.pass);
  }

  opts.jacobian_sign = -1;
  const std::vector<CheckResult> mutated = run_verify(opts);
  bool fd_failed = false;
  bool s4_passed = false;
  for (const auto& check : mutated) {
    if (check.name == "softmax-fd-jacobian") fd_failed = !check.pass;
    if (check.name == "trace-identity") s4_passed = check.pass;
  }
  CHECK(fd_failed);  // the finite-difference check catches the sign error
  CHECK(s4_passed);  // the trace identity is sign-blind
}

TEST_CASE("at the largest noise magnitude damped fusion keeps up with trivial fusion") {
  ExperimentConfig cfg;
  cfg.n = 600;
  cfg.hidden = {16};
  cfg.train.epochs = 60;
  cfg.trials = 4;
  cfg.seed = 5;
  cfg.methods = {"stat", "stat+jacreg"};
  cfg.gammas = {1.0, 0.1};
  cfg.sweep_base = "gaussian";
  cfg.magnitudes = {0.5, 4.0};
  const std::vector<SweepRow> rows = run_sweep(cfg);

  double trivial = -1.0, damped = -1.0;
  for (const auto& row : rows) {
    if (row.magnitude != 4.0) continue;
    if (row.method == "stat" && row.gamma == 1.0) trivial = row.acc_mean;
    if (row.method == "stat+jacreg" && row.gamma == 0.1) damped = row.acc_mean;
  }
  REQUIRE(trivial >= 0.0);
  REQUIRE(damped >= 0.0);
  CHECK(damped >= trivial - 0.005);
}

TEST_CASE("regularizing the A side or both sides also runs end to end") {
  ExperimentConfig cfg = small_config();
  cfg.gammas = {0.5};
  cfg.perturb_modality = 'a';
  cfg.regularize = "a";
  cfg.trials = 1;
  const ResultRecord rec_a = run_eval(cfg);
  CHECK(rec_a.rows.size() == 2);

  cfg.regularize = "both";
  const ResultRecord rec_both = run_eval(cfg);
  for (const auto& row : rec_both.rows) {
    CHECK(row.clean_mean >= 0.0);
    CHECK(row.clean_mean <= 1.0);
    CHECK(row.noisy_std >= 0.0);
  }
}

TEST_CASE("a three-class blobs experiment runs through every fusion method") {
  ExperimentConfig cfg;
  cfg.dataset = "gaussian_blobs";
  cfg.n = 300;
  cfg.blobs_k = 3;
  cfg.dim_a = 3;
  cfg.dim_b = 3;
  cfg.separation = 4.0;
  cfg.hidden = {8};
  cfg.train.epochs = 30;
  cfg.trials = 1;
  cfg.seed = 17;
  cfg.methods = {"stat", "stat+jacreg", "mean", "mean+conf"};
  cfg.gammas = {0.5};
  cfg.perturbs = {PerturbSpec::parse("gaussian:omega0=1.5")};
  const ResultRecord record = run_eval(cfg);
  CHECK(record.rows.size() == 4);
  for (const auto& row : record.rows) {
    // well-separated blobs: every method should beat chance comfortably
    CHECK(row.clean_mean > 0.6);
  }
}

TEST_CASE("config validation rejects bad combinations") {
  ExperimentConfig cfg = small_config();
  cfg.methods = {};
  CHECK_THROWS_AS(cfg.validate(), DomainError);

  cfg = small_config();
  cfg.methods = {"stat+jacreg"};
  cfg.gammas = {};
  CHECK_THROWS_AS(cfg.validate(), DomainError);

  cfg = small_config();
  cfg.gammas = {1.5};
  CHECK_THROWS_AS(cfg.validate(), DomainError);

  cfg = small_config();
  cfg.trials = 0;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
}
