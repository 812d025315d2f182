#include "jacfuse/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "jacfuse/datagen.hpp"
#include "jacfuse/errors.hpp"
#include "jacfuse/fusion.hpp"
#include "jacfuse/jacreg.hpp"
#include "jacfuse/rng.hpp"

namespace jacfuse {

namespace {

using nlohmann::json;

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

double parse_double(const std::string& v, const std::string& ctx) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ParseError(ctx + ": expected a number, got '" + v + "'");
  }
}

std::uint64_t parse_u64(const std::string& v, const std::string& ctx) {
  try {
    std::size_t pos = 0;
    const std::uint64_t u = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return u;
  } catch (const std::exception&) {
    throw ParseError(ctx + ": expected a nonnegative integer, got '" + v + "'");
  }
}

bool is_jacreg_method(const std::string& m) { return m == "stat+jacreg"; }

struct TrialModels {
  MlpModel model_a;
  MlpModel model_b;
  UnimodalHead head_a;
  UnimodalHead head_b;
  ClassFrequencies freq{Vector{1.0}};
};

struct Accumulator {
  std::vector<double> clean;  // one accuracy per trial
  std::vector<double> noisy;
  double jac_sum = 0.0;
  std::size_t jac_count = 0;
  double bound = std::numeric_limits<double>::quiet_NaN();
};

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["data"] = {{"dataset", c.dataset},     {"n", c.n},
               {"jitter", c.jitter},       {"blobs_k", c.blobs_k},
               {"dim_a", c.dim_a},         {"dim_b", c.dim_b},
               {"separation", c.separation}, {"file", c.data_file},
               {"train_fraction", c.train_fraction}};
  j["model"] = {{"hidden", c.hidden},
                {"epochs", c.train.epochs},
                {"learning_rate", c.train.learning_rate},
                {"batch_size", c.train.batch_size},
                {"weight_init_scale", c.train.weight_init_scale},
                {"model_a", c.model_a_file},
                {"model_b", c.model_b_file}};
  std::vector<std::string> specs;
  for (const auto& p : c.perturbs) specs.push_back(p.to_string());
  j["fusion"] = {{"methods", c.methods},
                 {"gammas", c.gammas},
                 {"t_max", c.t_max},
                 {"regularize", c.regularize}};
  j["perturb"] = {{"specs", specs}, {"modality", std::string(1, c.perturb_modality)}};
  j["sweep"] = {{"base", c.sweep_base}, {"magnitudes", c.magnitudes}};
  j["run"] = {{"trials", c.trials}, {"seed", c.seed}};
  return j;
}

json finite_or_string(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (dataset != "two_moons" && dataset != "gaussian_blobs") {
    throw DomainError("config: dataset must be two_moons or gaussian_blobs");
  }
  if (methods.empty()) throw DomainError("config: methods must be non-empty");
  for (const auto& m : methods) {
    if (m != "stat" && m != "stat+jacreg" && m != "mean" && m != "mean+conf") {
      throw DomainError("config: unknown fusion method '" + m + "'");
    }
  }
  bool any_jacreg = false;
  for (const auto& m : methods) any_jacreg = any_jacreg || is_jacreg_method(m);
  if (any_jacreg && gammas.empty()) {
    throw DomainError("config: gamma list must be non-empty when stat+jacreg is selected");
  }
  for (double g : gammas) {
    if (!(g > 0.0 && g <= 1.0)) throw DomainError("config: gamma values must be in (0,1]");
  }
  if (trials < 1) throw DomainError("config: trials must be >= 1");
  if (perturb_modality != 'a' && perturb_modality != 'b') {
    throw DomainError("config: perturb modality must be a or b");
  }
  if (regularize != "a" && regularize != "b" && regularize != "both" &&
      regularize != "auto") {
    throw DomainError("config: regularize must be a, b, both, or auto");
  }
  train.validate();
}

ExperimentConfig ExperimentConfig::parse(std::istream& in, const std::string& name) {
  ExperimentConfig cfg;
  cfg.perturbs.clear();
  std::string line;
  std::string section;
  std::size_t line_no = 0;
  bool saw_perturb_spec = false;

  while (std::getline(in, line)) {
    ++line_no;
    const std::string ctx = name + ":" + std::to_string(line_no);
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    // trim
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const auto e = line.find_last_not_of(" \t\r");
    line = line.substr(b, e - b + 1);

    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(ctx + ": unterminated section header");
      section = line.substr(1, line.size() - 2);
      if (section != "data" && section != "model" && section != "fusion" &&
          section != "perturb" && section != "sweep" && section != "run") {
        throw ParseError(ctx + ": unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(ctx + ": expected key = value");
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    const auto kend = key.find_last_not_of(" \t");
    key = key.substr(0, kend + 1);
    const auto vstart = value.find_first_not_of(" \t");
    value = vstart == std::string::npos ? "" : value.substr(vstart);
    if (key.empty() || value.empty()) throw ParseError(ctx + ": empty key or value");

    if (section == "data") {
      if (key == "dataset") cfg.dataset = value;
      else if (key == "n") cfg.n = parse_u64(value, ctx);
      else if (key == "jitter") cfg.jitter = parse_double(value, ctx);
      else if (key == "k") cfg.blobs_k = parse_u64(value, ctx);
      else if (key == "dim_a") cfg.dim_a = parse_u64(value, ctx);
      else if (key == "dim_b") cfg.dim_b = parse_u64(value, ctx);
      else if (key == "separation") cfg.separation = parse_double(value, ctx);
      else if (key == "file") cfg.data_file = value;
      else if (key == "train_fraction") cfg.train_fraction = parse_double(value, ctx);
      else throw ParseError(ctx + ": unknown key '" + key + "' in [data]");
    } else if (section == "model") {
      if (key == "hidden") {
        cfg.hidden.clear();
        for (const auto& tok : split_ws(value))
          cfg.hidden.push_back(parse_u64(tok, ctx));
      } else if (key == "epochs") cfg.train.epochs = parse_u64(value, ctx);
      else if (key == "learning_rate") cfg.train.learning_rate = parse_double(value, ctx);
      else if (key == "batch_size") cfg.train.batch_size = parse_u64(value, ctx);
      else if (key == "weight_init_scale")
        cfg.train.weight_init_scale = parse_double(value, ctx);
      else if (key == "model_a") cfg.model_a_file = value;
      else if (key == "model_b") cfg.model_b_file = value;
      else throw ParseError(ctx + ": unknown key '" + key + "' in [model]");
    } else if (section == "fusion") {
      if (key == "methods") cfg.methods = split_ws(value);
      else if (key == "gammas") {
        cfg.gammas.clear();
        for (const auto& tok : split_ws(value)) cfg.gammas.push_back(parse_double(tok, ctx));
      } else if (key == "t_max") cfg.t_max = parse_u64(value, ctx);
      else if (key == "regularize") cfg.regularize = value;
      else throw ParseError(ctx + ": unknown key '" + key + "' in [fusion]");
    } else if (section == "perturb") {
      if (key == "spec") {
        try {
          cfg.perturbs.push_back(PerturbSpec::parse(value));
        } catch (const ParseError& err) {
          throw ParseError(ctx + ": " + err.what());
        }
        saw_perturb_spec = true;
      } else if (key == "modality") {
        if (value != "a" && value != "b") throw ParseError(ctx + ": modality must be a|b");
        cfg.perturb_modality = value[0];
      } else throw ParseError(ctx + ": unknown key '" + key + "' in [perturb]");
    } else if (section == "sweep") {
      if (key == "base") cfg.sweep_base = value;
      else if (key == "magnitudes") {
        cfg.magnitudes.clear();
        for (const auto& tok : split_ws(value))
          cfg.magnitudes.push_back(parse_double(tok, ctx));
      } else throw ParseError(ctx + ": unknown key '" + key + "' in [sweep]");
    } else if (section == "run") {
      if (key == "trials") cfg.trials = parse_u64(value, ctx);
      else if (key == "seed") cfg.seed = parse_u64(value, ctx);
      else throw ParseError(ctx + ": unknown key '" + key + "' in [run]");
    } else {
      throw ParseError(ctx + ": key outside any section");
    }
  }
  if (!saw_perturb_spec && cfg.perturbs.empty()) {
    cfg.perturbs.push_back(PerturbSpec::parse("gaussian:omega0=1.0"));
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("config: cannot open " + path.string());
  return parse(in, path.filename().string());
}

namespace {

MultimodalDataset make_dataset(const ExperimentConfig& cfg, std::uint64_t seed) {
  if (!cfg.data_file.empty()) return load_dataset(cfg.data_file);
  if (cfg.dataset == "two_moons") return two_moons(cfg.n, cfg.jitter, seed);
  return gaussian_blobs(cfg.n, cfg.blobs_k, cfg.dim_a, cfg.dim_b, cfg.separation, seed);
}

TrialModels prepare_trial(const ExperimentConfig& cfg, const MultimodalDataset& train_set,
                          std::uint64_t tseed) {
  TrialModels out;
  const std::size_t k = train_set.num_classes;

  auto build = [&](const LabeledDataset& data, const std::string& file,
                   std::uint64_t init_stream, std::uint64_t train_stream) {
    if (!file.empty()) return load_model(file);
    std::vector<std::size_t> dims;
    dims.push_back(data.x[0].size());
    dims.insert(dims.end(), cfg.hidden.begin(), cfg.hidden.end());
    dims.push_back(k);
    MlpModel m = MlpModel::init(dims, derive_seed(tseed, init_stream),
                                cfg.train.weight_init_scale);
    TrainConfig tc = cfg.train;
    tc.seed = derive_seed(tseed, train_stream);
    return train(std::move(m), data, tc);
  };

  out.model_a = build(train_set.modality_a(), cfg.model_a_file, 3, 4);
  out.model_b = build(train_set.modality_b(), cfg.model_b_file, 5, 6);
  out.head_a = as_head(out.model_a, "a");
  out.head_b = as_head(out.model_b, "b");
  out.freq = estimate_freq(train_set.y, k);
  return out;
}

struct FusePlan {
  std::string method;
  double gamma = 1.0;
  bool jacreg = false;
  FusionConfig fusion;
};

Prediction fuse_sample(const FusePlan& plan, const TrialModels& models, const Vector& za,
                       const Vector& zb, double* jac_norm_out) {
  if (plan.method == "mean") return mean_fuse(softmax(za), softmax(zb));
  if (plan.method == "mean+conf") {
    return confidence_weighted_fuse(softmax(za), softmax(zb));
  }
  if (!plan.jacreg) return statistical_fuse(softmax(za), softmax(zb), models.freq);
  RecalibrationResult res =
      recalibrate(za, zb, models.head_a, models.head_b, models.freq, plan.fusion);
  if (jac_norm_out) *jac_norm_out = res.jac_norm_sq;
  return res.p_prime;
}

}  // namespace

ResultRecord run_eval(const ExperimentConfig& cfg) {
  cfg.validate();

  std::string reg = cfg.regularize;
  if (reg == "auto") reg = std::string(1, cfg.perturb_modality);

  std::vector<FusePlan> plans;
  for (const auto& method : cfg.methods) {
    for (double gamma : cfg.gammas) {
      FusePlan plan;
      plan.method = method;
      plan.gamma = gamma;
      plan.jacreg = is_jacreg_method(method);
      plan.fusion.gamma = gamma;
      plan.fusion.t_max = cfg.t_max;
      plan.fusion.regularize_a = reg == "a" || reg == "both";
      plan.fusion.regularize_b = reg == "b" || reg == "both";
      plans.push_back(plan);
    }
  }

  std::map<std::tuple<std::string, double, std::string>, Accumulator> table;

  for (std::size_t trial = 0; trial < cfg.trials; ++trial) {
    const std::uint64_t tseed = derive_seed(cfg.seed, trial);
    const MultimodalDataset dataset = make_dataset(cfg, derive_seed(tseed, 1));
    const auto [train_set, test_set] =
        split_train_test(dataset, cfg.train_fraction, derive_seed(tseed, 2));
    const TrialModels models = prepare_trial(cfg, train_set, tseed);

    // Clean logits are shared by every plan and perturbation.
    std::vector<Vector> za_clean, zb_clean;
    za_clean.reserve(test_set.size());
    zb_clean.reserve(test_set.size());
    for (std::size_t i = 0; i < test_set.size(); ++i) {
      za_clean.push_back(forward(models.model_a, test_set.xa[i]).logits);
      zb_clean.push_back(forward(models.model_b, test_set.xb[i]).logits);
    }

    for (std::size_t pi = 0; pi < cfg.perturbs.size(); ++pi) {
      const PerturbSpec& spec = cfg.perturbs[pi];
      const bool hit_a = cfg.perturb_modality == 'a';
      const MlpModel& attacked = hit_a ? models.model_a : models.model_b;

      // Noisy logits depend only on the perturbation, not on the fusion plan.
      std::vector<Vector> za_noisy = za_clean, zb_noisy = zb_clean;
      const std::uint64_t pseed = derive_seed(tseed, 100 + pi);
      for (std::size_t i = 0; i < test_set.size(); ++i) {
        const Vector& x = hit_a ? test_set.xa[i] : test_set.xb[i];
        const Vector xp =
            apply_perturbation(spec, attacked, x, test_set.y[i], derive_seed(pseed, i));
        (hit_a ? za_noisy[i] : zb_noisy[i]) = forward(attacked, xp).logits;
      }

      for (const FusePlan& plan : plans) {
        std::size_t clean_hits = 0, noisy_hits = 0;
        double jac_sum = 0.0;
        std::size_t jac_count = 0;
        for (std::size_t i = 0; i < test_set.size(); ++i) {
          double jac = std::numeric_limits<double>::quiet_NaN();
          const Prediction pc = fuse_sample(plan, models, za_clean[i], zb_clean[i], &jac);
          if (plan.jacreg && !std::isnan(jac)) {
            jac_sum += jac;
            ++jac_count;
          }
          const Prediction pn = fuse_sample(plan, models, za_noisy[i], zb_noisy[i], &jac);
          if (plan.jacreg && !std::isnan(jac)) {
            jac_sum += jac;
            ++jac_count;
          }
          clean_hits += pc.argmax() == static_cast<std::size_t>(test_set.y[i]);
          noisy_hits += pn.argmax() == static_cast<std::size_t>(test_set.y[i]);
        }
        Accumulator& acc = table[{plan.method, plan.gamma, spec.to_string()}];
        const double denom = static_cast<double>(test_set.size());
        acc.clean.push_back(static_cast<double>(clean_hits) / denom);
        acc.noisy.push_back(static_cast<double>(noisy_hits) / denom);
        acc.jac_sum += jac_sum;
        acc.jac_count += jac_count;
        if (plan.jacreg) {
          acc.bound = plan.gamma < 1.0 ? plan.gamma * static_cast<double>(
                                             test_set.num_classes) /
                                             (2.0 * (1.0 - plan.gamma))
                                       : std::numeric_limits<double>::infinity();
        }
      }
    }
  }

  ResultRecord record;
  record.config = cfg;
  for (const auto& [key, acc] : table) {
    ResultRow row;
    row.method = std::get<0>(key);
    row.gamma = std::get<1>(key);
    row.perturb = std::get<2>(key);
    row.clean_mean = mean_of(acc.clean);
    row.clean_std = sample_std(acc.clean);
    row.noisy_mean = mean_of(acc.noisy);
    row.noisy_std = sample_std(acc.noisy);
    row.jac_norm_sq_mean = acc.jac_count > 0
                               ? acc.jac_sum / static_cast<double>(acc.jac_count)
                               : std::numeric_limits<double>::quiet_NaN();
    row.bound = acc.bound;
    record.rows.push_back(row);
  }
  // std::map already yields (method, gamma, perturb) order.
  return record;
}

std::string eval_json_string(const ResultRecord& record, bool include_timestamp) {
  json j;
  j["config"] = config_to_json(record.config);
  j["rows"] = json::array();
  for (const auto& row : record.rows) {
    j["rows"].push_back({{"method", row.method},
                         {"gamma", row.gamma},
                         {"perturb", row.perturb},
                         {"clean_mean", row.clean_mean},
                         {"clean_std", row.clean_std},
                         {"noisy_mean", row.noisy_mean},
                         {"noisy_std", row.noisy_std},
                         {"jac_norm_sq_mean", finite_or_string(row.jac_norm_sq_mean)},
                         {"bound", finite_or_string(row.bound)}});
  }
  if (include_timestamp) {
    j["timestamp"] = static_cast<std::int64_t>(
        std::chrono::duration_cast<std::chrono::seconds>(
            std::chrono::system_clock::now().time_since_epoch())
            .count());
  }
  return j.dump(2) + "\n";
}

void write_eval_json(const ResultRecord& record, const std::filesystem::path& path,
                     bool include_timestamp) {
  std::ofstream out(path);
  if (!out) throw IoError("write_eval_json: cannot open " + path.string());
  out << eval_json_string(record, include_timestamp);
  if (!out) throw IoError("write_eval_json: write failed for " + path.string());
}

void write_eval_csv(const ResultRecord& record, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("write_eval_csv: cannot open " + path.string());
  out << "method,gamma,perturb,clean_mean,clean_std,noisy_mean,noisy_std,"
         "jac_norm_sq_mean,bound\n";
  for (const auto& row : record.rows) {
    out << row.method << "," << row.gamma << "," << row.perturb << "," << row.clean_mean
        << "," << row.clean_std << "," << row.noisy_mean << "," << row.noisy_std << ",";
    if (!std::isnan(row.jac_norm_sq_mean)) out << row.jac_norm_sq_mean;
    out << ",";
    if (!std::isnan(row.bound)) {
      if (std::isinf(row.bound)) out << "inf";
      else out << row.bound;
    }
    out << "\n";
  }
  if (!out) throw IoError("write_eval_csv: write failed for " + path.string());
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.magnitudes.empty()) {
    throw DomainError("sweep: magnitudes list must be non-empty");
  }
  const PerturbSpec base = PerturbSpec::parse(cfg.sweep_base);

  ExperimentConfig inner = cfg;
  inner.perturbs.clear();
  for (double m : cfg.magnitudes) inner.perturbs.push_back(base.with_magnitude(m));
  const ResultRecord record = run_eval(inner);

  std::vector<SweepRow> rows;
  for (std::size_t mi = 0; mi < cfg.magnitudes.size(); ++mi) {
    const std::string key = inner.perturbs[mi].to_string();
    for (const auto& row : record.rows) {
      if (row.perturb != key) continue;
      SweepRow out;
      out.method = row.method;
      out.gamma = row.gamma;
      out.magnitude = cfg.magnitudes[mi];
      out.perturb = key;
      out.acc_mean = row.noisy_mean;
      out.acc_std = row.noisy_std;
      rows.push_back(out);
    }
  }
  std::sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    return std::tie(a.method, a.gamma, a.magnitude) <
           std::tie(b.method, b.gamma, b.magnitude);
  });
  return rows;
}

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("write_sweep_csv: cannot open " + path.string());
  out << "method,gamma,magnitude,perturb,acc_mean,acc_std\n";
  for (const auto& row : rows) {
    out << row.method << "," << row.gamma << "," << row.magnitude << "," << row.perturb
        << "," << row.acc_mean << "," << row.acc_std << "\n";
  }
  if (!out) throw IoError("write_sweep_csv: write failed for " + path.string());
}

}  // namespace jacfuse
