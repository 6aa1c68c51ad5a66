// SPDX-License-Identifier: Apache-2.0
#include "cli.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "tsa/pipeline.hpp"
#include "tsa/plot.hpp"
#include "tsa/synth.hpp"

namespace tsa::cli {

namespace {

namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitUser = 1;
constexpr int kExitInternal = 2;

std::string shortest(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

/// --seed wins, then TSA_SEED, then 0.
std::uint64_t resolve_seed(const std::optional<std::uint64_t> &flag) {
  if (flag)
    return *flag;
  if (const char *env = std::getenv("TSA_SEED")) {
    std::uint64_t v = 0;
    const std::string_view s(env);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
      throw Error(ErrorCode::InvalidArgument, "TSA_SEED='" + std::string(env) + "' is not an unsigned integer");
    return v;
  }
  return 0;
}

FeatureFormat resolve_format(const std::string &flag, const fs::path &path) {
  return flag.empty() ? format_from_extension(path) : parse_feature_format(flag);
}

void echo(std::ostream &err, const std::vector<std::pair<std::string, std::string>> &entries) {
  for (const auto &[k, v] : entries)
    err << "# " << k << " = " << v << "\n";
}

nlohmann::json matrix_json(const Matrix &m) {
  auto rows = nlohmann::json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    auto row = nlohmann::json::array();
    for (Index j = 0; j < m.cols(); ++j)
      row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::json vector_json(const Vector &v) {
  auto out = nlohmann::json::array();
  for (Index i = 0; i < v.size(); ++i)
    out.push_back(v(i));
  return out;
}

std::string model_json(const TsaModel &model, const RunConfig &config, const TrainState &state) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json cfg;
  for (const auto &[k, v] : config_entries(config))
    cfg[k] = v;
  j["config"] = std::move(cfg);
  auto layers = nlohmann::json::array();
  for (std::size_t l = 0; l < model.layers.size(); ++l)
    layers.push_back({{"activation", l + 1 < model.layers.size() ? "relu" : "linear"},
                      {"weight", matrix_json(model.layers[l].weight)},
                      {"bias", vector_json(model.layers[l].bias)}});
  j["layers"] = std::move(layers);
  j["a_raw"] = vector_json(model.a_raw);
  j["alpha"] = vector_json(model.alpha());
  j["epochs"] = state.epoch;
  j["stop"] = to_string(state.stop);
  j["loss_history"] = state.loss_history;
  return j.dump(1) + "\n";
}

struct Common {
  std::optional<std::uint64_t> seed;
};

// ---------------------------------------------------------------- synth

struct SynthArgs {
  SynthSpec spec;
  fs::path out_features, out_labels;
  std::string format;
  Common common;
};

void add_synth(CLI::App &app, SynthArgs &a) {
  app.add_option("--out-features", a.out_features, "feature file to write")->required();
  app.add_option("--out-labels", a.out_labels, "label file to write")->required();
  app.add_option("--format", a.format, "text|binary (default: by extension)");
  app.add_option("--segments", a.spec.n_segments, "number of action segments");
  app.add_option("--min-frames", a.spec.min_frames_per_segment, "shortest segment");
  app.add_option("--max-frames", a.spec.max_frames_per_segment, "longest segment");
  app.add_option("--dims", a.spec.dims, "feature dimensionality");
  app.add_option("--classes", a.spec.n_action_classes, "distinct action classes");
  app.add_option("--sigma", a.spec.noise_sigma, "per-dimension Gaussian noise");
  app.add_option("--separation", a.spec.center_separation, "minimum centre distance");
  app.add_flag("--background", a.spec.background, "interleave background segments");
  app.add_option("--seed", a.common.seed, "RNG seed (fallback: TSA_SEED)");
}

int run_synth(SynthArgs &a, std::ostream &err) {
  a.spec.seed = resolve_seed(a.common.seed);
  echo(err, {{"segments", std::to_string(a.spec.n_segments)},
             {"min_frames", std::to_string(a.spec.min_frames_per_segment)},
             {"max_frames", std::to_string(a.spec.max_frames_per_segment)},
             {"dims", std::to_string(a.spec.dims)},
             {"classes", std::to_string(a.spec.n_action_classes)},
             {"sigma", shortest(a.spec.noise_sigma)},
             {"separation", shortest(a.spec.center_separation)},
             {"background", a.spec.background ? "true" : "false"},
             {"seed", std::to_string(a.spec.seed)}});
  const auto video = generate(a.spec);
  save_features(video.features, a.out_features, resolve_format(a.format, a.out_features));
  save_labels(video.labels.labels, a.out_labels, video.labels.names);
  return kExitOk;
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  fs::path features, config_file, out_z, out_model, log, dump_triplets;
  std::string format, z_format;
  std::map<std::string, std::string> overrides;
  Common common;
};

void add_train(CLI::App &app, TrainArgs &a) {
  app.add_option("--features", a.features, "input feature matrix")->required();
  app.add_option("--format", a.format, "input format text|binary (default: by extension)");
  app.add_option("--config", a.config_file, "key = value config file");
  app.add_option("--out-z", a.out_z, "learned features (binary unless --z-format text)")->required();
  app.add_option("--z-format", a.z_format, "text|binary for --out-z (default: binary)");
  app.add_option("--out-model", a.out_model, "model parameters (JSON)");
  app.add_option("--log", a.log, "training log (default: stdout)");
  app.add_option("--dump-triplets", a.dump_triplets, "write sampled triplets per epoch");
  // Every RunConfig key doubles as a flag; flags override the config file.
  for (const auto &[key, value] : config_entries(RunConfig{})) {
    if (key == "seed")
      continue;
    const std::string name = key;
    app.add_option_function<std::string>(
        "--" + key, [&a, name](const std::string &v) { a.overrides[name] = v; },
        "config override (default " + value + ")");
  }
  app.add_option("--seed", a.common.seed, "RNG seed (fallback: TSA_SEED)");
}

int run_train(TrainArgs &a, std::ostream &out, std::ostream &err) {
  RunConfig config;
  if (!a.config_file.empty())
    config = load_config(a.config_file);
  for (const auto &[k, v] : a.overrides)
    set_config_value(config, k, v);
  if (a.common.seed || std::getenv("TSA_SEED"))
    config.seed = resolve_seed(a.common.seed);
  config.validate();

  const auto X = load_features(a.features, resolve_format(a.format, a.features));

  std::ofstream log_file;
  if (!a.log.empty()) {
    log_file.open(a.log, std::ios::trunc);
    if (!log_file)
      throw Error(ErrorCode::Io, "cannot open '" + a.log.string() + "' for writing");
  }
  std::ostream &log = a.log.empty() ? out : log_file;
  std::ofstream triplet_file;
  if (!a.dump_triplets.empty()) {
    triplet_file.open(a.dump_triplets, std::ios::trunc);
    if (!triplet_file)
      throw Error(ErrorCode::Io, "cannot open '" + a.dump_triplets.string() + "' for writing");
    triplet_file << "# epoch anchor positive negative\n";
  }

  log << "# features = " << a.features.string() << "\n";
  log << "# frames = " << X.frames() << ", dims = " << X.dims() << "\n";
  log << format_config(config, "# ");

  auto result = train(X, config, [&](const EpochReport &r) {
    log << "epoch " << r.epoch << " loss " << shortest(r.loss) << " lr " << shortest(r.lr) << "\n";
    if (triplet_file.is_open() && r.triplets)
      for (const auto &t : *r.triplets)
        triplet_file << r.epoch << " " << t.anchor << " " << t.positive << " " << t.negative << "\n";
  });
  log << "# stop = " << to_string(result.state.stop) << " after " << result.state.epoch
      << " epochs\n";
  log.flush();

  const auto z_format = a.z_format.empty() ? FeatureFormat::binary : parse_feature_format(a.z_format);
  save_features(FeatureMatrix(result.Z), a.out_z, z_format);
  if (!a.out_model.empty())
    write_file(a.out_model, model_json(result.model, config, result.state));
  if (result.state.stop == StopReason::diverged) {
    err << "error: training diverged at epoch " << result.state.epoch + 1
        << "; wrote the last finite state\n";
    return kExitUser;
  }
  return kExitOk;
}

// -------------------------------------------------------------- segment

struct SegmentArgs {
  fs::path z, out;
  std::string format, method;
  int k = 0;
  Common common;
};

void add_segment(CLI::App &app, SegmentArgs &a) {
  app.add_option("--z", a.z, "feature matrix to cluster (learned Z or raw X)")->required();
  app.add_option("--format", a.format, "text|binary (default: by extension)");
  app.add_option("--method", a.method, "kmeans|finch|spectral|equal")->required();
  app.add_option("--k", a.k, "number of segments/clusters")->required();
  app.add_option("--out", a.out, "predicted label file")->required();
  app.add_option("--seed", a.common.seed, "RNG seed (fallback: TSA_SEED)");
}

int run_segment(SegmentArgs &a, std::ostream &err) {
  const auto method = parse_cluster_method(a.method);
  const auto seed = resolve_seed(a.common.seed);
  echo(err, {{"method", to_string(method)}, {"k", std::to_string(a.k)}, {"seed", std::to_string(seed)}});
  const auto Z = load_features(a.z, resolve_format(a.format, a.z));
  if (a.k < 1 || a.k > Z.frames())
    throw Error(ErrorCode::InvalidArgument,
                "k=" + std::to_string(a.k) + " must lie in [1, N=" + std::to_string(Z.frames()) + "]");
  const auto seg = segment(Z.values(), method, a.k, seed);
  save_labels(seg.labels, a.out);
  return kExitOk;
}

// ----------------------------------------------------------------- eval

struct EvalArgs {
  fs::path pred, gt, out;
  std::optional<std::string> background;
  double tau = 0.75;
  Common common;
};

void add_eval(CLI::App &app, EvalArgs &a) {
  app.add_option("--pred", a.pred, "predicted label file")->required();
  app.add_option("--gt", a.gt, "ground-truth label file")->required();
  app.add_option("--background", a.background, "background token; enables removal");
  app.add_option("--tau", a.tau, "fraction of background frames removed (default 0.75)");
  app.add_option("--out", a.out, "also write the scores JSON here");
  app.add_option("--seed", a.common.seed, "RNG seed (fallback: TSA_SEED)");
}

int run_eval(EvalArgs &a, std::ostream &out, std::ostream &err) {
  const auto seed = resolve_seed(a.common.seed);
  echo(err, {{"background", a.background.value_or("")},
             {"tau", a.background ? shortest(a.tau) : "n/a"},
             {"seed", std::to_string(seed)}});
  auto pred = load_labels(a.pred);
  auto gt = load_labels(a.gt, a.background);
  if (pred.size() != gt.size())
    throw Error(ErrorCode::LengthMismatch, "prediction has " + std::to_string(pred.size()) +
                                               " frames, ground truth has " +
                                               std::to_string(gt.size()));
  Scores scores;
  if (a.background) {
    if (!gt.background_id)
      throw Error(ErrorCode::MissingBackground,
                  "background token '" + *a.background + "' does not occur in " + a.gt.string());
    Rng rng(seed);
    const auto kept = remove_background(gt, a.tau, rng);
    scores = score(filter_frames(pred.labels, kept), filter_frames(gt, kept));
  } else {
    scores = score(pred.labels, gt);
  }
  const auto json = scores_json(scores);
  out << json << "\n";
  if (!a.out.empty())
    write_file(a.out, json + "\n");
  return kExitOk;
}

// ----------------------------------------------------------------- plot

struct PlotArgs {
  fs::path gt, out;
  std::vector<std::string> preds;
};

void add_plot(CLI::App &app, PlotArgs &a) {
  app.add_option("--gt", a.gt, "ground-truth label file")->required();
  app.add_option("--pred", a.preds, "NAME=PATH prediction (repeatable)");
  app.add_option("--out", a.out, "SVG output")->required();
}

int run_plot(PlotArgs &a, std::ostream &err) {
  const auto gt = load_labels(a.gt);
  std::vector<NamedLabels> preds;
  for (const auto &spec : a.preds) {
    const auto eq = spec.find('=');
    const auto name = eq == std::string::npos ? fs::path(spec).stem().string() : spec.substr(0, eq);
    const auto path = eq == std::string::npos ? spec : spec.substr(eq + 1);
    preds.push_back({name, load_labels(path).labels});
  }
  echo(err, {{"gt", a.gt.string()}, {"predictions", std::to_string(preds.size())}});
  write_file(a.out, render_segmentation_svg(gt, preds));
  return kExitOk;
}

} // namespace

int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
  CLI::App app{"Temporal-semantic aware action segmentation"};
  app.require_subcommand(1);

  SynthArgs synth_args;
  TrainArgs train_args;
  SegmentArgs segment_args;
  EvalArgs eval_args;
  PlotArgs plot_args;
  auto *synth = app.add_subcommand("synth", "generate a planted synthetic video");
  auto *train_cmd = app.add_subcommand("train", "learn TSA features from one video");
  // --h is the kernel bandwidth, so train keeps only the long help form.
  train_cmd->set_help_flag("--help", "print this help message and exit");
  auto *segment_cmd = app.add_subcommand("segment", "cluster features into k segments");
  auto *eval = app.add_subcommand("eval", "score predictions against ground truth");
  auto *plot = app.add_subcommand("plot", "render segmentation bars as SVG");
  add_synth(*synth, synth_args);
  add_train(*train_cmd, train_args);
  add_segment(*segment_cmd, segment_args);
  add_eval(*eval, eval_args);
  add_plot(*plot, plot_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUser;
  }

  try {
    if (synth->parsed())
      return run_synth(synth_args, err);
    if (train_cmd->parsed())
      return run_train(train_args, out, err);
    if (segment_cmd->parsed())
      return run_segment(segment_args, err);
    if (eval->parsed())
      return run_eval(eval_args, out, err);
    if (plot->parsed())
      return run_plot(plot_args, err);
  } catch (const Error &e) {
    err << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::Internal ? kExitInternal : kExitUser;
  } catch (const std::exception &e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}

} // namespace tsa::cli
