// mobcl: batch pipeline driver for the mobility-prediction library.
//
// Subcommands: ingest, synth, entropy, augment, curriculum, train, finetune,
// predict, eval, fano, gradcheck. Exit codes: 0 ok, 2 usage, 3 data error,
// 4 numeric failure. Environment variables MOBCL_SEED and MOBCL_THREADS may
// override the seed and thread count; everything else comes from the config
// file and flags.

#include <Eigen/Core>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "mobcl/augment.hpp"
#include "mobcl/curriculum.hpp"
#include "mobcl/dataset.hpp"
#include "mobcl/entropy.hpp"
#include "mobcl/features.hpp"
#include "mobcl/metrics.hpp"
#include "mobcl/model/checkpoint.hpp"
#include "mobcl/model/net.hpp"
#include "mobcl/model/trainer.hpp"
#include "mobcl/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace mobcl;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Pipeline configuration (JSON file; flags and env override selectively)

struct PipelineConfig {
  ModelConfig model;  // carries grid/time/features/seed
  OptimizerConfig optimizer;
  std::vector<StageSpec> stages = default_stages();
  SynthConfig synth;
  GeoBleuParams geobleu;
  int observe_days = 60;
  double val_ratio = 0.0;
  bool augment = true;
  bool disjoint = false;
  std::uint64_t seed = 1;

  void apply_seed(std::uint64_t s) {
    seed = s;
    model.seed = s;
    optimizer.seed = s;
    synth.seed = s;
  }
};

ordered_json stages_to_json(const std::vector<StageSpec>& stages) {
  ordered_json arr = ordered_json::array();
  for (const auto& s : stages) {
    ordered_json j;
    if (std::isfinite(s.entropy_upper))
      j["entropy_upper"] = s.entropy_upper;
    else
      j["entropy_upper"] = nullptr;  // null = unbounded final stage
    j["horizon_days"] = s.horizon_days;
    j["epochs"] = s.epochs;
    arr.push_back(j);
  }
  return arr;
}

std::vector<StageSpec> stages_from_json(const ordered_json& arr) {
  std::vector<StageSpec> stages;
  for (const auto& j : arr) {
    StageSpec s;
    if (j.contains("entropy_upper") && !j.at("entropy_upper").is_null())
      s.entropy_upper = j.at("entropy_upper").get<double>();
    else
      s.entropy_upper = std::numeric_limits<double>::infinity();
    s.horizon_days = j.value("horizon_days", s.horizon_days);
    s.epochs = j.value("epochs", s.epochs);
    stages.push_back(s);
  }
  return stages;
}

ordered_json pipeline_to_json(const PipelineConfig& cfg) {
  ordered_json j;
  j["model"] = ordered_json::parse(config_to_json(cfg.model));
  j["optimizer"] = {{"lr", cfg.optimizer.lr},
                    {"finetune_lr", cfg.optimizer.finetune_lr},
                    {"beta1", cfg.optimizer.beta1},
                    {"beta2", cfg.optimizer.beta2},
                    {"eps", cfg.optimizer.eps},
                    {"batch_size", cfg.optimizer.batch_size},
                    {"epochs_per_stage", cfg.optimizer.epochs_per_stage},
                    {"finetune_epochs", cfg.optimizer.finetune_epochs},
                    {"shuffle_within_stage", cfg.optimizer.shuffle_within_stage},
                    {"seed", cfg.optimizer.seed}};
  j["stages"] = stages_to_json(cfg.stages);
  j["synth"] = {{"num_users", cfg.synth.num_users},
                {"commuter_frac", cfg.synth.commuter_frac},
                {"explorer_frac", cfg.synth.explorer_frac},
                {"random_frac", cfg.synth.random_frac},
                {"noise_prob", cfg.synth.noise_prob},
                {"sparsity", cfg.synth.sparsity},
                {"poi_categories", cfg.synth.poi_categories},
                {"seed", cfg.synth.seed}};
  j["geobleu"] = {{"max_n", cfg.geobleu.max_n},
                  {"weights", cfg.geobleu.weights},
                  {"beta", cfg.geobleu.beta},
                  {"optimal_matching", cfg.geobleu.optimal_matching}};
  j["observe_days"] = cfg.observe_days;
  j["val_ratio"] = cfg.val_ratio;
  j["augment"] = cfg.augment;
  j["disjoint"] = cfg.disjoint;
  j["seed"] = cfg.seed;
  return j;
}

PipelineConfig pipeline_from_json(const ordered_json& j) {
  PipelineConfig cfg;
  if (j.contains("model")) cfg.model = config_from_json(j.at("model").dump());
  if (j.contains("optimizer")) {
    const auto& o = j.at("optimizer");
    cfg.optimizer.lr = o.value("lr", cfg.optimizer.lr);
    cfg.optimizer.finetune_lr =
        o.value("finetune_lr", cfg.optimizer.finetune_lr);
    cfg.optimizer.beta1 = o.value("beta1", cfg.optimizer.beta1);
    cfg.optimizer.beta2 = o.value("beta2", cfg.optimizer.beta2);
    cfg.optimizer.eps = o.value("eps", cfg.optimizer.eps);
    cfg.optimizer.batch_size = o.value("batch_size", cfg.optimizer.batch_size);
    cfg.optimizer.epochs_per_stage =
        o.value("epochs_per_stage", cfg.optimizer.epochs_per_stage);
    cfg.optimizer.finetune_epochs =
        o.value("finetune_epochs", cfg.optimizer.finetune_epochs);
    cfg.optimizer.shuffle_within_stage =
        o.value("shuffle_within_stage", cfg.optimizer.shuffle_within_stage);
    cfg.optimizer.seed = o.value("seed", cfg.optimizer.seed);
  }
  if (j.contains("stages")) cfg.stages = stages_from_json(j.at("stages"));
  if (j.contains("synth")) {
    const auto& s = j.at("synth");
    cfg.synth.num_users = s.value("num_users", cfg.synth.num_users);
    cfg.synth.commuter_frac =
        s.value("commuter_frac", cfg.synth.commuter_frac);
    cfg.synth.explorer_frac =
        s.value("explorer_frac", cfg.synth.explorer_frac);
    cfg.synth.random_frac = s.value("random_frac", cfg.synth.random_frac);
    cfg.synth.noise_prob = s.value("noise_prob", cfg.synth.noise_prob);
    cfg.synth.sparsity = s.value("sparsity", cfg.synth.sparsity);
    cfg.synth.poi_categories =
        s.value("poi_categories", cfg.synth.poi_categories);
    cfg.synth.seed = s.value("seed", cfg.synth.seed);
  }
  if (j.contains("geobleu")) {
    const auto& g = j.at("geobleu");
    cfg.geobleu.max_n = g.value("max_n", cfg.geobleu.max_n);
    cfg.geobleu.weights =
        g.value("weights", cfg.geobleu.weights);
    cfg.geobleu.beta = g.value("beta", cfg.geobleu.beta);
    cfg.geobleu.optimal_matching =
        g.value("optimal_matching", cfg.geobleu.optimal_matching);
  }
  cfg.observe_days = j.value("observe_days", cfg.observe_days);
  cfg.val_ratio = j.value("val_ratio", cfg.val_ratio);
  cfg.augment = j.value("augment", cfg.augment);
  cfg.disjoint = j.value("disjoint", cfg.disjoint);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.synth.grid = cfg.model.grid;
  cfg.synth.time = cfg.model.time;
  return cfg;
}

PipelineConfig load_pipeline(const std::string& path) {
  if (path.empty()) return PipelineConfig{};
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file: " + path);
  ordered_json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("bad config file " + path + ": " + e.what());
  }
  return pipeline_from_json(j);
}

// ---------------------------------------------------------------------------
// Shared I/O helpers

Dataset read_dataset(const std::string& path, const GridSpec& grid,
                     const TimeSpec& time) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open data file: " + path);
  return ingest_trajectories(in, grid, time);
}

void attach_poi(Dataset& ds, const std::string& path, int categories) {
  if (path.empty()) return;
  std::ifstream in(path);
  if (!in) throw DataError("cannot open poi file: " + path);
  ds.poi = ingest_poi(in, ds.grid, categories);
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create output dir: " + dir);
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

void write_config_echo(const std::string& dir, const ordered_json& j) {
  auto out = open_out(fs::path(dir) / "config.json");
  out << j.dump(2) << "\n";
}

std::uint64_t parse_u64(const char* text, const char* what) {
  try {
    return std::stoull(text);
  } catch (const std::exception&) {
    throw DataError(std::string("bad ") + what + ": " + text);
  }
}

// ---------------------------------------------------------------------------
// Subcommands

int cmd_ingest(const PipelineConfig& cfg, const std::string& data,
               const std::string& poi, const std::string& out_dir) {
  Dataset ds = read_dataset(data, cfg.model.grid, cfg.model.time);
  attach_poi(ds, poi, cfg.model.poi_categories);
  ensure_dir(out_dir);
  auto report = validate(ds);
  {
    auto out = open_out(fs::path(out_dir) / "dataset.csv");
    write_trajectories_csv(ds, out);
  }
  if (ds.poi) {
    auto out = open_out(fs::path(out_dir) / "poi.csv");
    write_poi_csv(*ds.poi, ds.grid, out);
  }
  {
    auto out = open_out(fs::path(out_dir) / "validation.txt");
    write_validation_report(report, out);
  }
  write_config_echo(out_dir, pipeline_to_json(cfg));
  std::cout << "ingested " << ds.num_users() << " users, "
            << report.total_points << " points\n";
  if (!report.ok()) throw DataError("validation found bound violations");
  return kExitOk;
}

int cmd_synth(const PipelineConfig& cfg, const std::string& out_dir) {
  cfg.synth.check();
  Dataset ds = synth_generate(cfg.synth);
  ensure_dir(out_dir);
  {
    auto out = open_out(fs::path(out_dir) / "trajectories.csv");
    write_trajectories_csv(ds, out);
  }
  if (ds.poi) {
    auto out = open_out(fs::path(out_dir) / "poi.csv");
    write_poi_csv(*ds.poi, ds.grid, out);
  }
  write_config_echo(out_dir, pipeline_to_json(cfg));
  std::cout << "generated " << ds.num_users() << " users\n";
  return kExitOk;
}

int cmd_entropy(const PipelineConfig& cfg, const std::string& data,
                const std::string& out_dir, std::size_t bins) {
  Dataset ds = read_dataset(data, cfg.model.grid, cfg.model.time);
  ensure_dir(out_dir);
  {
    auto out = open_out(fs::path(out_dir) / "entropy.csv");
    out << "uid,n_symbols,dict_size,h_lz,h_norm\n";
    char buf[64];
    for (const auto& [uid, traj] : ds.trajectories) {
      auto seq = symbolize(traj, ds.grid);
      auto parse = lz_parse(seq);
      double h_lz = seq.size() >= 2 ? lz_entropy(parse) : 0.0;
      double h_norm = normalized_entropy(seq);
      out << uid << ',' << seq.size() << ',' << parse.dict_size << ',';
      std::snprintf(buf, sizeof buf, "%.12g,%.12g\n", h_lz, h_norm);
      out << buf;
    }
  }
  {
    auto hist = entropy_histogram(ds, bins);
    auto out = open_out(fs::path(out_dir) / "histogram.csv");
    out << "bin_lo,bin_hi,count\n";
    char buf[96];
    for (std::size_t i = 0; i < hist.counts.size(); ++i) {
      double lo = static_cast<double>(i) / static_cast<double>(bins);
      double hi = static_cast<double>(i + 1) / static_cast<double>(bins);
      std::snprintf(buf, sizeof buf, "%.12g,%.12g,%zu\n", lo, hi,
                    hist.counts[i]);
      out << buf;
    }
  }
  write_config_echo(out_dir, pipeline_to_json(cfg));
  std::cout << "entropy written for " << ds.num_users() << " users\n";
  return kExitOk;
}

int cmd_augment(const PipelineConfig& cfg, const std::string& data,
                const std::string& out_dir) {
  Dataset ds = read_dataset(data, cfg.model.grid, cfg.model.time);
  Dataset aug = augment_dataset(ds);
  ensure_dir(out_dir);
  {
    auto out = open_out(fs::path(out_dir) / "augmented.csv");
    write_trajectories_csv(aug, out);
  }
  write_config_echo(out_dir, pipeline_to_json(cfg));
  std::cout << "augmented " << ds.num_users() << " -> " << aug.num_users()
            << " users\n";
  return kExitOk;
}

int cmd_curriculum(const PipelineConfig& cfg, const std::string& data,
                   const std::string& out_dir) {
  Dataset ds = read_dataset(data, cfg.model.grid, cfg.model.time);
  if (cfg.augment) ds = augment_dataset(ds);
  auto schedule = build_curriculum(ds, cfg.stages, cfg.disjoint);
  ensure_dir(out_dir);
  {
    auto out = open_out(fs::path(out_dir) / "schedule.csv");
    write_schedule_csv(schedule, out);
  }
  write_config_echo(out_dir, pipeline_to_json(cfg));
  std::cout << "scheduled " << schedule.entries.size() << " entries over "
            << schedule.stages.size() << " stages\n";
  if (schedule.had_empty_stage) std::cerr << "warning: empty stage\n";
  return kExitOk;
}

int cmd_train(PipelineConfig cfg, const std::string& data,
              const std::string& poi, const std::string& out_dir) {
  Dataset ds = read_dataset(data, cfg.model.grid, cfg.model.time);
  attach_poi(ds, poi, cfg.model.poi_categories);

  Dataset train_ds = ds;
  std::optional<Dataset> val_ds;
  if (cfg.val_ratio > 0.0) {
    auto split =
        split_by_user(ds, 1.0 - cfg.val_ratio, cfg.val_ratio, 0.0, cfg.seed);
    train_ds = std::move(split.train);
    val_ds = std::move(split.val);
  }
  if (cfg.augment) train_ds = augment_dataset(train_ds);

  auto schedule = build_curriculum(train_ds, cfg.stages, cfg.disjoint);
  SampleStore store(train_ds, cfg.model.features, cfg.observe_days);
  std::optional<SampleStore> val_store;
  if (val_ds && !val_ds->trajectories.empty())
    val_store.emplace(*val_ds, cfg.model.features, cfg.observe_days);

  auto result = train(schedule, store, val_store ? &*val_store : nullptr,
                      cfg.model, cfg.optimizer);
  for (const auto& e : result.history.epochs)
    if (!std::isfinite(e.train_loss))
      throw NumericError("non-finite training loss");

  ensure_dir(out_dir);
  save_checkpoint_file(*result.model, (fs::path(out_dir) / "checkpoint.bin").string());
  {
    auto out = open_out(fs::path(out_dir) / "history.csv");
    write_history_csv(result.history, out);
  }
  {
    auto out = open_out(fs::path(out_dir) / "schedule.csv");
    write_schedule_csv(schedule, out);
  }
  write_config_echo(out_dir, pipeline_to_json(cfg));
  std::cout << "trained " << result.history.epochs.size() << " epochs\n";
  return kExitOk;
}

int cmd_finetune(PipelineConfig cfg, const std::string& checkpoint,
                 const std::string& data, const std::string& poi,
                 const std::string& out_dir, int horizon_days) {
  auto model = load_checkpoint_file(checkpoint);
  cfg.model = model->config();
  Dataset ds = read_dataset(data, cfg.model.grid, cfg.model.time);
  attach_poi(ds, poi, cfg.model.poi_categories);
  Dataset real = finetune_selector(ds);
  SampleStore store(real, cfg.model.features, cfg.observe_days);
  auto history =
      finetune(*model, store, nullptr, cfg.optimizer, horizon_days);
  for (const auto& e : history.epochs)
    if (!std::isfinite(e.train_loss))
      throw NumericError("non-finite finetune loss");
  ensure_dir(out_dir);
  save_checkpoint_file(*model, (fs::path(out_dir) / "checkpoint.bin").string());
  {
    auto out = open_out(fs::path(out_dir) / "history.csv");
    write_history_csv(history, out);
  }
  write_config_echo(out_dir, pipeline_to_json(cfg));
  std::cout << "finetuned " << history.epochs.size() << " epochs\n";
  return kExitOk;
}

int cmd_predict(PipelineConfig cfg, const std::string& checkpoint,
                const std::string& data, const std::string& poi,
                const std::string& out_dir, int horizon_days) {
  auto model = load_checkpoint_file(checkpoint);
  cfg.model = model->config();
  Dataset ds = read_dataset(data, cfg.model.grid, cfg.model.time);
  attach_poi(ds, poi, cfg.model.poi_categories);
  const PoiTable* table = ds.poi ? &*ds.poi : nullptr;
  ensure_dir(out_dir);
  auto out = open_out(fs::path(out_dir) / "predictions.csv");
  out << "uid,d,t,x,y\n";
  std::size_t predicted = 0;
  for (const auto& [uid, traj] : ds.trajectories) {
    Trajectory prefix;
    prefix.uid = uid;
    std::vector<std::pair<int, int>> slots;
    for (const auto& p : traj.points) {
      if (p.dId < cfg.observe_days)
        prefix.points.push_back(p);
      else if (p.dId < cfg.observe_days + horizon_days)
        slots.emplace_back(p.dId, p.tId);
    }
    if (prefix.points.empty() || slots.empty()) continue;
    auto pred = model->predict(prefix, table, cfg.observe_days, slots);
    for (const auto& p : pred.points)
      out << uid << ',' << p.dId << ',' << p.tId << ',' << p.x << ','
          << p.y << '\n';
    ++predicted;
  }
  write_config_echo(out_dir, pipeline_to_json(cfg));
  std::cout << "predicted " << predicted << " users\n";
  return kExitOk;
}

int cmd_eval(const PipelineConfig& cfg, const std::string& pred_path,
             const std::string& truth_path, const std::string& out_dir,
             int from_day) {
  Dataset pred = read_dataset(pred_path, cfg.model.grid, cfg.model.time);
  Dataset truth = read_dataset(truth_path, cfg.model.grid, cfg.model.time);
  auto window = [from_day](const Dataset& ds) {
    std::map<std::string, std::vector<TrajectoryPoint>> m;
    for (const auto& [uid, traj] : ds.trajectories) {
      std::vector<TrajectoryPoint> pts;
      for (const auto& p : traj.points)
        if (p.dId >= from_day) pts.push_back(p);
      if (!pts.empty()) m[uid] = std::move(pts);
    }
    return m;
  };
  auto report = evaluate(window(pred), window(truth), cfg.geobleu);
  ensure_dir(out_dir);
  {
    auto out = open_out(fs::path(out_dir) / "metrics.json");
    write_metrics_json(report, out);
  }
  {
    auto out = open_out(fs::path(out_dir) / "summary.txt");
    write_metrics_summary(report, out);
  }
  write_config_echo(out_dir, pipeline_to_json(cfg));
  write_metrics_summary(report, std::cout);
  return kExitOk;
}

int cmd_fano(double h, std::int64_t q) {
  if (q < 2) throw DataError("fano: alphabet must be >= 2");
  double phi = fano_max_accuracy(h, q);
  if (!std::isfinite(phi)) throw NumericError("fano: solver failed");
  std::printf("%.12g\n", phi);
  return kExitOk;
}

int cmd_gradcheck(int embed_dim, int layers, int heads, int grid_side,
                  double eps, double tol, std::size_t samples,
                  std::uint64_t seed) {
  ModelConfig cfg;
  cfg.grid = {grid_side, grid_side, 500.0};
  cfg.embed_dim = embed_dim;
  cfg.num_layers = layers;
  cfg.num_heads = heads;
  cfg.ffn_dim = 2 * embed_dim;
  cfg.seed = seed;
  cfg.check();

  SynthConfig scfg;
  scfg.grid = cfg.grid;
  scfg.time = {48, 6};
  scfg.num_users = 1;
  scfg.commuter_frac = 0.0;
  scfg.explorer_frac = 0.0;
  scfg.random_frac = 1.0;
  scfg.sparsity = 0.9;
  scfg.seed = seed;
  cfg.time = scfg.time;
  Dataset ds = synth_generate(scfg);
  const Trajectory& traj = ds.trajectories.begin()->second;
  ModelSample sample = build_model_sample(traj, nullptr, cfg.features, 3, 3,
                                          cfg.grid, cfg.time);

  Network net(cfg);
  double max_rel = net.grad_check(sample, eps, samples, seed);
  std::printf("max_rel_err=%.12g\n", max_rel);
  if (!(max_rel < tol)) throw NumericError("gradient check failed");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mobility prediction pipeline"};
  app.require_subcommand(1);

  std::string config_path;
  std::string seed_flag;
  int threads = 0;
  bool deterministic = false;
  app.add_option("--config", config_path, "pipeline config JSON")
      ->check(CLI::ExistingFile);
  app.add_option("--seed", seed_flag, "override the pipeline seed");
  app.add_option("--threads", threads, "cap worker threads");
  app.add_flag("--deterministic", deterministic,
               "force single-threaded math paths");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "validate and normalize CSV data");
  std::string data, poi, out_dir;
  ingest->add_option("--data", data, "trajectory CSV")->required();
  ingest->add_option("--poi", poi, "POI CSV");
  ingest->add_option("--out", out_dir, "output directory")->required();

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic population");
  int synth_users = -1;
  double synth_noise = -1.0, synth_sparsity = -1.0;
  synth->add_option("--out", out_dir, "output directory")->required();
  synth->add_option("--users", synth_users, "number of users");
  synth->add_option("--noise", synth_noise, "per-slot detour probability");
  synth->add_option("--sparsity", synth_sparsity, "fraction of slots dropped");

  // entropy
  auto* entropy = app.add_subcommand("entropy", "per-user LZ entropy report");
  std::size_t bins = 20;
  entropy->add_option("--data", data, "trajectory CSV")->required();
  entropy->add_option("--out", out_dir, "output directory")->required();
  entropy->add_option("--bins", bins, "histogram bins");

  // augment
  auto* augment = app.add_subcommand("augment", "write all four variants");
  augment->add_option("--data", data, "trajectory CSV")->required();
  augment->add_option("--out", out_dir, "output directory")->required();

  // curriculum
  auto* curriculum =
      app.add_subcommand("curriculum", "entropy-ordered training schedule");
  curriculum->add_option("--data", data, "trajectory CSV")->required();
  curriculum->add_option("--out", out_dir, "output directory")->required();

  // train
  auto* train_cmd = app.add_subcommand("train", "curriculum pretraining");
  train_cmd->add_option("--data", data, "trajectory CSV")->required();
  train_cmd->add_option("--poi", poi, "POI CSV");
  train_cmd->add_option("--out", out_dir, "output directory")->required();

  // finetune
  auto* finetune_cmd =
      app.add_subcommand("finetune", "continue training on real data");
  std::string checkpoint;
  int horizon_days = 15;
  finetune_cmd->add_option("--checkpoint", checkpoint, "model checkpoint")
      ->required();
  finetune_cmd->add_option("--data", data, "trajectory CSV")->required();
  finetune_cmd->add_option("--poi", poi, "POI CSV");
  finetune_cmd->add_option("--out", out_dir, "output directory")->required();
  finetune_cmd->add_option("--horizon-days", horizon_days,
                           "prediction horizon");

  // predict
  auto* predict = app.add_subcommand("predict", "argmax-decode target slots");
  predict->add_option("--checkpoint", checkpoint, "model checkpoint")
      ->required();
  predict->add_option("--data", data, "trajectory CSV")->required();
  predict->add_option("--poi", poi, "POI CSV");
  predict->add_option("--out", out_dir, "output directory")->required();
  predict->add_option("--horizon-days", horizon_days, "prediction horizon");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "GEO-BLEU and DTW report");
  std::string pred_path, truth_path;
  int from_day = 0;
  eval_cmd->add_option("--pred", pred_path, "predictions CSV")->required();
  eval_cmd->add_option("--truth", truth_path, "ground-truth CSV")->required();
  eval_cmd->add_option("--out", out_dir, "output directory")->required();
  eval_cmd->add_option("--from-day", from_day, "first day to score");

  // fano
  auto* fano = app.add_subcommand("fano", "max accuracy for entropy H");
  fano->set_help_flag("--help", "print help");  // frees -h for --h
  double fano_h = 0.0;
  std::int64_t fano_q = 0;
  fano->add_option("--h", fano_h, "entropy in bits")->required();
  fano->add_option("--q", fano_q, "alphabet size")->required();

  // gradcheck
  auto* gradcheck =
      app.add_subcommand("gradcheck", "verify gradients by central differences");
  int gc_embed = 16, gc_layers = 1, gc_heads = 1, gc_grid = 20;
  double gc_eps = 1e-5, gc_tol = 1e-4;
  std::size_t gc_samples = 200;
  gradcheck->add_option("--embed-dim", gc_embed, "embedding width");
  gradcheck->add_option("--layers", gc_layers, "encoder layers");
  gradcheck->add_option("--heads", gc_heads, "attention heads");
  gradcheck->add_option("--grid", gc_grid, "square grid side");
  gradcheck->add_option("--eps", gc_eps, "finite-difference step");
  gradcheck->add_option("--tol", gc_tol, "max relative error tolerance");
  gradcheck->add_option("--samples", gc_samples, "minimum sampled parameters");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: usage: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    PipelineConfig cfg = load_pipeline(config_path);

    // environment may override only the seed and thread count
    if (const char* env = std::getenv("MOBCL_SEED"))
      cfg.apply_seed(parse_u64(env, "MOBCL_SEED"));
    if (const char* env = std::getenv("MOBCL_THREADS"))
      threads = static_cast<int>(parse_u64(env, "MOBCL_THREADS"));
    if (!seed_flag.empty())
      cfg.apply_seed(parse_u64(seed_flag.c_str(), "--seed"));

    if (deterministic) threads = 1;
    if (threads > 0) Eigen::setNbThreads(threads);

    if (*ingest) return cmd_ingest(cfg, data, poi, out_dir);
    if (*synth) {
      if (synth_users > 0) cfg.synth.num_users = synth_users;
      if (synth_noise >= 0.0) cfg.synth.noise_prob = synth_noise;
      if (synth_sparsity >= 0.0) cfg.synth.sparsity = synth_sparsity;
      return cmd_synth(cfg, out_dir);
    }
    if (*entropy) return cmd_entropy(cfg, data, out_dir, bins);
    if (*augment) return cmd_augment(cfg, data, out_dir);
    if (*curriculum) return cmd_curriculum(cfg, data, out_dir);
    if (*train_cmd) return cmd_train(cfg, data, poi, out_dir);
    if (*finetune_cmd)
      return cmd_finetune(cfg, checkpoint, data, poi, out_dir, horizon_days);
    if (*predict)
      return cmd_predict(cfg, checkpoint, data, poi, out_dir, horizon_days);
    if (*eval_cmd)
      return cmd_eval(cfg, pred_path, truth_path, out_dir, from_day);
    if (*fano) return cmd_fano(fano_h, fano_q);
    if (*gradcheck)
      return cmd_gradcheck(gc_embed, gc_layers, gc_heads, gc_grid, gc_eps,
                           gc_tol, gc_samples, cfg.seed);
    std::cerr << "error: usage: no subcommand\n";
    return kExitUsage;
  } catch (const NumericError& e) {
    std::cerr << "error: numeric: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const DataError& e) {
    std::string msg = e.what();
    if (msg.find("non-finite") != std::string::npos) {
      std::cerr << "error: numeric: " << msg << "\n";
      return kExitNumeric;
    }
    std::cerr << "error: data: " << msg << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: data: " << e.what() << "\n";
    return kExitData;
  }
}
