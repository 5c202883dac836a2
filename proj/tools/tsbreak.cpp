// tsbreak command-line front end: synthetic data generation, breakpoint
// detection (autoencoder, PELT, BOCPD), evaluation, and the window-size
// heuristic. Every command is deterministic given its flags and seed.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tsbreak/tsbreak.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (const unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex8(std::uint64_t h) {
  static const char* digits = "0123456789abcdef";
  std::string out(8, '0');
  for (int i = 7; i >= 0; --i) {
    out[i] = digits[h & 0xf];
    h >>= 4;
  }
  return out;
}

std::string config_digest(const json& config) { return hex8(fnv1a(config.dump())); }

void write_manifest(const fs::path& dir, const std::string& command,
                    const json& config, const std::vector<std::string>& outputs) {
  json manifest;
  manifest["tool"] = "tsbreak";
  manifest["version"] = kVersion;
  manifest["command"] = command;
  manifest["config"] = config;
  manifest["config_digest"] = config_digest(config);
  manifest["outputs"] = outputs;
  std::ofstream out(dir / "manifest.json");
  if (!out) throw tsbreak::ParseError("cannot write manifest in '" + dir.string() + "'");
  out << manifest.dump(2) << '\n';
}

tsbreak::CsvLayout parse_layout(const std::string& name) {
  if (name == "columns") return tsbreak::CsvLayout::kChannelsAsColumns;
  if (name == "rows") return tsbreak::CsvLayout::kChannelsAsRows;
  throw tsbreak::ConfigError("unknown layout '" + name + "'");
}

std::vector<std::size_t> parse_size_list(const std::string& csv) {
  std::vector<std::size_t> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    out.push_back(static_cast<std::size_t>(std::stoull(tok)));
  }
  return out;
}

struct SynthArgs {
  std::size_t T = 2000;
  std::size_t k = 4;
  std::uint64_t seed = 0;
  std::string kind = "step_mean";
  double param_low = 0.5;
  double param_high = 5.0;
  double noise_sigma = 1.0;
  std::string out_dir = "out";
};

int run_synth(const SynthArgs& a) {
  tsbreak::SynthConfig cfg;
  cfg.T = a.T;
  cfg.k = a.k;
  cfg.seed = a.seed;
  if (a.kind == "step_mean")
    cfg.kind = tsbreak::SynthKind::kStepMean;
  else if (a.kind == "exponential_segments")
    cfg.kind = tsbreak::SynthKind::kExponentialSegments;
  else
    throw tsbreak::ConfigError("unknown kind '" + a.kind + "'");
  cfg.param_low = a.param_low;
  cfg.param_high = a.param_high;
  cfg.noise_sigma = a.noise_sigma;

  const auto [series, labels] = tsbreak::generate(cfg);
  fs::create_directories(a.out_dir);
  const fs::path dir(a.out_dir);
  tsbreak::save_csv(series, (dir / "series.csv").string(),
                    tsbreak::CsvLayout::kChannelsAsColumns);
  tsbreak::save_labels(labels, (dir / "labels.txt").string());

  json config = {{"T", a.T},          {"k", a.k},
                 {"seed", a.seed},    {"kind", a.kind},
                 {"param_low", a.param_low}, {"param_high", a.param_high},
                 {"noise_sigma", a.noise_sigma}};
  write_manifest(dir, "synth", config, {"series.csv", "labels.txt"});
  std::cout << "synth: wrote series.csv (T=" << series.length
            << ", 1 channel) and labels.txt (" << labels.breakpoints.size()
            << " breakpoints) to " << a.out_dir << '\n';
  return 0;
}

struct DetectArgs {
  std::string input;
  std::string layout = "columns";
  bool header = false;
  std::string method = "autoencoder";
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  // autoencoder
  std::size_t window_size = 25;
  std::size_t stride = 0;  // 0 = half window
  std::string dims;        // comma list; empty = codebook-ratio heuristic
  std::size_t depth = 2;
  double learning_rate = 0.1;
  double weight_decay = 1e-4;
  std::size_t epochs = 50;
  double init_scale = 0.05;
  std::string loss = "square";
  std::string activation = "sigmoid";
  double min_prominence = 0.05;
  std::size_t min_separation = 1;
  std::size_t smooth_width = 0;
  std::string save_model;
  // pelt
  std::string cost = "normal_mean";
  std::string penalty = "bic";
  std::size_t min_segment = 2;
  // bocpd
  std::string model = "gamma";
  double a = 1.0;
  double b = 1.0;
  double mu = 1.15e5;
  double sigma = 1e4;
  double hazard_rate = 0.0;  // 0 = model default (1000 gamma, 250 gaussian)
  std::size_t max_run_length = 0;
  double threshold = 0.5;
  bool dump_posterior = false;
};

json detect_config_json(const DetectArgs& a) {
  json c = {{"input", a.input},   {"layout", a.layout}, {"header", a.header},
            {"method", a.method}, {"seed", a.seed}};
  if (a.method == "autoencoder") {
    c["window_size"] = a.window_size;
    c["stride"] = a.stride;
    c["dims"] = a.dims;
    c["depth"] = a.depth;
    c["learning_rate"] = a.learning_rate;
    c["weight_decay"] = a.weight_decay;
    c["epochs"] = a.epochs;
    c["init_scale"] = a.init_scale;
    c["loss"] = a.loss;
    c["activation"] = a.activation;
    c["min_prominence"] = a.min_prominence;
    c["min_separation"] = a.min_separation;
    c["smooth_width"] = a.smooth_width;
  } else if (a.method == "pelt") {
    c["cost"] = a.cost;
    c["penalty"] = a.penalty;
    c["min_segment"] = a.min_segment;
  } else {
    c["model"] = a.model;
    c["a"] = a.a;
    c["b"] = a.b;
    c["mu"] = a.mu;
    c["sigma"] = a.sigma;
    c["hazard_rate"] = a.hazard_rate;
    c["max_run_length"] = a.max_run_length;
    c["threshold"] = a.threshold;
    c["dump_posterior"] = a.dump_posterior;
  }
  return c;
}

int run_detect(const DetectArgs& a) {
  if (!fs::exists(a.input))
    throw tsbreak::ConfigError("input file '" + a.input + "' does not exist");
  const tsbreak::TimeSeries series =
      tsbreak::load_csv(a.input, parse_layout(a.layout), a.header);

  const json config = detect_config_json(a);
  const std::string digest = config_digest(config);
  fs::create_directories(a.out_dir);
  const fs::path dir(a.out_dir);

  tsbreak::DetectionResult result;
  std::vector<std::string> outputs{"result.json"};
  if (a.method == "autoencoder") {
    tsbreak::DetectorConfig dc;
    dc.window.window_size = a.window_size;
    dc.window.stride =
        a.stride > 0 ? a.stride : tsbreak::default_window_config(a.window_size).stride;
    const std::size_t input_dim = series.channels * a.window_size;
    dc.stack.layer_feature_dims =
        a.dims.empty() ? tsbreak::default_layer_dims(input_dim, a.depth)
                       : parse_size_list(a.dims);
    dc.stack.train.learning_rate = a.learning_rate;
    dc.stack.train.weight_decay = a.weight_decay;
    dc.stack.train.epochs = a.epochs;
    dc.stack.train.seed = a.seed;
    dc.stack.train.init_scale = a.init_scale;
    if (a.loss == "square")
      dc.stack.train.loss = tsbreak::LossKind::kSquare;
    else if (a.loss == "cross_entropy")
      dc.stack.train.loss = tsbreak::LossKind::kCrossEntropy;
    else
      throw tsbreak::ConfigError("unknown loss '" + a.loss + "'");
    if (a.activation == "sigmoid")
      dc.stack.train.activation = tsbreak::Activation::kSigmoid;
    else if (a.activation == "tanh")
      dc.stack.train.activation = tsbreak::Activation::kTanh;
    else
      throw tsbreak::ConfigError("unknown activation '" + a.activation + "'");
    dc.peaks.min_prominence = a.min_prominence;
    dc.peaks.min_separation = a.min_separation;
    dc.peaks.smooth_width = a.smooth_width;

    const tsbreak::ScalingParams scaling = tsbreak::fit_scaler(series);
    const tsbreak::WindowedSeries windows =
        tsbreak::segment(series, dc.window, scaling);
    const tsbreak::AutoencoderStack stack =
        tsbreak::train_stack(windows.vectors, dc.stack);
    result = tsbreak::detect_with_stack(series, stack, windows, dc.peaks);
    if (!a.save_model.empty()) tsbreak::save_stack(stack, a.save_model);
    tsbreak::save_curve_csv(*result.curve, (dir / "curve.csv").string());
    outputs.push_back("curve.csv");
  } else if (a.method == "pelt") {
    tsbreak::PeltConfig pc;
    if (a.cost == "normal_mean")
      pc.cost = tsbreak::PeltCost::kNormalMean;
    else if (a.cost == "normal_mean_variance")
      pc.cost = tsbreak::PeltCost::kNormalMeanVariance;
    else if (a.cost == "exponential")
      pc.cost = tsbreak::PeltCost::kExponential;
    else if (a.cost == "poisson")
      pc.cost = tsbreak::PeltCost::kPoisson;
    else
      throw tsbreak::ConfigError("unknown cost '" + a.cost + "'");
    if (a.penalty == "bic") {
      pc.use_bic = true;
    } else {
      pc.use_bic = false;
      pc.penalty = std::stod(a.penalty);
    }
    pc.min_segment = a.min_segment;
    result = tsbreak::pelt_segment(series, pc);
  } else if (a.method == "bocpd") {
    tsbreak::BocpdConfig bc;
    if (a.model == "gamma") {
      bc.model = tsbreak::GammaPrecisionModel{a.a, a.b};
      bc.hazard_rate = a.hazard_rate > 0.0 ? a.hazard_rate : 1000.0;
    } else if (a.model == "gaussian") {
      bc.model = tsbreak::GaussianMeanModel{a.mu, a.sigma};
      bc.hazard_rate = a.hazard_rate > 0.0 ? a.hazard_rate : 250.0;
    } else {
      throw tsbreak::ConfigError("unknown bocpd model '" + a.model + "'");
    }
    bc.max_run_length = a.max_run_length;
    bc.threshold = a.threshold;
    tsbreak::BocpdResult br = tsbreak::bocpd_run(series, bc);
    if (a.dump_posterior) {
      tsbreak::save_posterior_csv(br.posterior, (dir / "posterior.csv").string());
      outputs.push_back("posterior.csv");
    }
    result = std::move(br.detection);
  } else {
    throw tsbreak::ConfigError("unknown method '" + a.method + "'");
  }

  result.detector_id = a.method + ":" + digest;
  tsbreak::save_detection(result, (dir / "result.json").string());
  write_manifest(dir, "detect", config, outputs);
  std::cout << "detect: " << a.method << " found " << result.breakpoints.size()
            << " breakpoints; wrote " << (dir / "result.json").string() << '\n';
  return 0;
}

struct EvaluateArgs {
  std::string series;
  std::string layout = "columns";
  bool header = false;
  std::string labels;
  std::vector<std::string> detections;
  std::size_t tau = 10;
  std::string taus;  // comma list; empty = 1..2*tau
  double mse_stride = 1.0;
  double pl_max_ratio = 100.0;
  std::string out_dir = "out";
};

int run_evaluate(const EvaluateArgs& a) {
  const tsbreak::TimeSeries series =
      tsbreak::load_csv(a.series, parse_layout(a.layout), a.header);
  const tsbreak::LabelSet labels = tsbreak::load_labels(a.labels, series.length);

  tsbreak::EvalConfig ec;
  ec.tau = a.tau;
  if (!a.taus.empty()) ec.taus = parse_size_list(a.taus);
  ec.mse_stride = a.mse_stride;
  ec.pl_max_ratio = a.pl_max_ratio;

  fs::create_directories(a.out_dir);
  const fs::path dir(a.out_dir);
  std::vector<std::string> outputs;
  std::vector<std::pair<std::string, tsbreak::EvalReport>> rows;
  for (std::size_t i = 0; i < a.detections.size(); ++i) {
    const std::string& path = a.detections[i];
    const tsbreak::DetectionResult det = tsbreak::load_detection(path);
    for (const std::size_t bp : det.breakpoints)
      if (bp == 0 || bp >= series.length)
        throw tsbreak::ConfigError("detection '" + path + "' has breakpoint " +
                                   std::to_string(bp) +
                                   " outside the series range");
    const tsbreak::EvalReport report = tsbreak::evaluate_detection(labels, det, ec);
    // index prefix keeps outputs distinct when detection files share a name
    const std::string stem =
        std::to_string(i) + "_" + fs::path(path).stem().string();
    tsbreak::save_report(report, (dir / ("report_" + stem + ".json")).string());
    tsbreak::save_roc_csv(report.roc, (dir / ("roc_" + stem + ".csv")).string());
    outputs.push_back("report_" + stem + ".json");
    outputs.push_back("roc_" + stem + ".csv");
    rows.emplace_back(det.detector_id, report);
  }
  tsbreak::save_comparison_csv(rows, (dir / "comparison.csv").string());
  outputs.push_back("comparison.csv");

  json config = {{"series", a.series},       {"layout", a.layout},
                 {"header", a.header},       {"labels", a.labels},
                 {"detections", a.detections}, {"tau", a.tau},
                 {"taus", a.taus},           {"mse_stride", a.mse_stride},
                 {"pl_max_ratio", a.pl_max_ratio}};
  write_manifest(dir, "evaluate", config, outputs);
  std::cout << "evaluate: wrote " << rows.size() << " report(s) and comparison.csv to "
            << a.out_dir << '\n';
  return 0;
}

struct SuggestArgs {
  std::string labels;
  std::size_t T = 0;
  std::string series;
  std::string layout = "columns";
  bool header = false;
};

int run_suggest(const SuggestArgs& a) {
  std::size_t T = a.T;
  if (T == 0) {
    if (a.series.empty())
      throw tsbreak::ConfigError("provide --T or --series to size the label range");
    T = tsbreak::load_csv(a.series, parse_layout(a.layout), a.header).length;
  }
  const tsbreak::LabelSet labels = tsbreak::load_labels(a.labels, T);
  std::cout << tsbreak::suggest_window_size(labels, T) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tsbreak: time-series breakpoint detection toolkit"};
  app.set_version_flag("--version", kVersion);
  app.set_config("--config", "", "Read options from an INI/TOML file");
  app.require_subcommand(1);

  SynthArgs sa;
  CLI::App* synth = app.add_subcommand("synth", "Generate a seeded synthetic series");
  synth->add_option("--T", sa.T, "Series length");
  synth->add_option("--k", sa.k, "Changepoint count");
  synth->add_option("--seed", sa.seed, "RNG seed");
  synth->add_option("--kind", sa.kind, "step_mean | exponential_segments");
  synth->add_option("--param-low", sa.param_low, "Segment parameter range low");
  synth->add_option("--param-high", sa.param_high, "Segment parameter range high");
  synth->add_option("--noise-sigma", sa.noise_sigma, "Noise sigma (step_mean)");
  synth->add_option("--out", sa.out_dir, "Output directory");

  DetectArgs da;
  CLI::App* detect = app.add_subcommand("detect", "Detect breakpoints in a CSV series");
  detect->add_option("--input", da.input, "Series CSV path")->required();
  detect->add_option("--layout", da.layout, "columns | rows");
  detect->add_flag("--header", da.header, "First CSV row is a header");
  detect->add_option("--method", da.method, "autoencoder | pelt | bocpd");
  detect->add_option("--seed", da.seed, "RNG seed");
  detect->add_option("--out", da.out_dir, "Output directory");
  detect->add_option("--window-size", da.window_size, "Window size N_w");
  detect->add_option("--stride", da.stride, "Window stride (0 = half window)");
  detect->add_option("--dims", da.dims, "Per-layer feature dims, comma separated");
  detect->add_option("--depth", da.depth, "Stack depth when --dims is not given");
  detect->add_option("--learning-rate", da.learning_rate, "SGD learning rate");
  detect->add_option("--weight-decay", da.weight_decay, "Weight decay lambda");
  detect->add_option("--epochs", da.epochs, "SGD epochs per layer");
  detect->add_option("--init-scale", da.init_scale, "Uniform init half-width");
  detect->add_option("--loss", da.loss, "square | cross_entropy");
  detect->add_option("--activation", da.activation, "sigmoid | tanh");
  detect->add_option("--min-prominence", da.min_prominence,
                     "Peak prominence as a fraction of the curve max");
  detect->add_option("--min-separation", da.min_separation,
                     "Minimum peak separation in curve indices");
  detect->add_option("--smooth-width", da.smooth_width,
                     "Odd moving-average width (0 = off)");
  detect->add_option("--save-model", da.save_model, "Save the trained stack here");
  detect->add_option("--cost", da.cost,
                     "normal_mean | normal_mean_variance | exponential | poisson");
  detect->add_option("--penalty", da.penalty, "PELT penalty value or 'bic'");
  detect->add_option("--min-segment", da.min_segment, "PELT minimum segment length");
  detect->add_option("--model", da.model, "gamma | gaussian");
  detect->add_option("--a", da.a, "Gamma prior shape");
  detect->add_option("--b", da.b, "Gamma prior rate");
  detect->add_option("--mu", da.mu, "Gaussian prior mean");
  detect->add_option("--sigma", da.sigma, "Gaussian prior/observation sigma");
  detect->add_option("--hazard-rate", da.hazard_rate,
                     "Expected run length (0 = model default)");
  detect->add_option("--max-run-length", da.max_run_length,
                     "Run-length cap (0 = series length)");
  detect->add_option("--threshold", da.threshold, "Changepoint probability threshold");
  detect->add_flag("--dump-posterior", da.dump_posterior,
                   "Write the BOCPD run-length posterior as CSV");

  EvaluateArgs ea;
  CLI::App* evaluate =
      app.add_subcommand("evaluate", "Score detections against ground truth");
  evaluate->add_option("--series", ea.series, "Series CSV path")->required();
  evaluate->add_option("--layout", ea.layout, "columns | rows");
  evaluate->add_flag("--header", ea.header, "First CSV row is a header");
  evaluate->add_option("--labels", ea.labels, "Ground-truth label file")->required();
  evaluate->add_option("--detections", ea.detections, "Detection JSON files")
      ->required()
      ->expected(-1);
  evaluate->add_option("--tau", ea.tau, "Primary toleration distance");
  evaluate->add_option("--taus", ea.taus, "ROC sweep taus, comma separated");
  evaluate->add_option("--mse-stride", ea.mse_stride,
                       "Stride dividing timestamp gaps for MSE units");
  evaluate->add_option("--pl-max-ratio", ea.pl_max_ratio,
                       "Prediction ratio above which PL is undefined");
  evaluate->add_option("--out", ea.out_dir, "Output directory");

  SuggestArgs ga;
  CLI::App* suggest =
      app.add_subcommand("suggest-window", "Window-size heuristic from labels");
  suggest->add_option("--labels", ga.labels, "Ground-truth label file")->required();
  suggest->add_option("--T", ga.T, "Series length");
  suggest->add_option("--series", ga.series, "Series CSV to take T from");
  suggest->add_option("--layout", ga.layout, "columns | rows");
  suggest->add_flag("--header", ga.header, "First CSV row is a header");

  try {
    app.parse(argc, argv);
    if (synth->parsed()) return run_synth(sa);
    if (detect->parsed()) return run_detect(da);
    if (evaluate->parsed()) return run_evaluate(ea);
    if (suggest->parsed()) return run_suggest(ga);
    return 2;
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const tsbreak::TrainingDivergedError& e) {
    std::cerr << "tsbreak: training diverged: " << e.what() << '\n';
    return 3;
  } catch (const tsbreak::Error& e) {
    std::cerr << "tsbreak: error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "tsbreak: error: " << e.what() << '\n';
    return 2;
  }
}
