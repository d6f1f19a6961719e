// Command-line entry point: training, evaluation, forecasting, synthetic
// data generation, and the numerical verification harness.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "odecast/data.hpp"
#include "odecast/metrics.hpp"
#include "odecast/model.hpp"
#include "odecast/training.hpp"
#include "odecast/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace odecast;

namespace {

// Flat key-value run configuration. File keys and command-line flags share
// the same names; flags win, and unknown file keys are rejected.
struct RunConfig {
  std::string data;
  std::string out = "runs/latest";
  std::string mode = "single_step";
  std::size_t input_len = 24;
  std::size_t horizon = 1;
  std::size_t hidden = 32;
  std::size_t embed_dim = 16;
  std::size_t decoder_hidden = 64;
  long long dilation_factor = 2;
  std::string widths = "2,3,6,7";
  std::string cta_method = "euler";
  double cta_time = 1.0;
  double cta_step = 0.25;
  std::string cgp_method = "euler";
  double cgp_time = 1.0;
  double cgp_step = 0.5;
  std::size_t topk = 20;
  double beta = 3.0;
  double dropout = 0.3;
  std::string ablation;  // comma-separated flag names
  std::string split = "auto";
  std::string scaler = "auto";
  double mask_threshold = 0.0;
  int epochs = 30;
  std::size_t batch = 16;
  double lr = 1e-3;
  double lr_decay_gamma = 1.0;
  int lr_decay_step = 10;
  double clip_norm = 5.0;
  std::uint64_t seed = 1;
};

std::vector<std::size_t> parse_size_list(const std::string& s) {
  std::vector<std::size_t> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(static_cast<std::size_t>(std::stoull(item)));
  }
  return out;
}

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  return out;
}

std::vector<std::string> parse_name_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

json run_config_to_json(const RunConfig& c) {
  return json{{"data", c.data},
              {"out", c.out},
              {"mode", c.mode},
              {"input_len", c.input_len},
              {"horizon", c.horizon},
              {"hidden", c.hidden},
              {"embed_dim", c.embed_dim},
              {"decoder_hidden", c.decoder_hidden},
              {"dilation_factor", c.dilation_factor},
              {"widths", c.widths},
              {"cta_method", c.cta_method},
              {"cta_time", c.cta_time},
              {"cta_step", c.cta_step},
              {"cgp_method", c.cgp_method},
              {"cgp_time", c.cgp_time},
              {"cgp_step", c.cgp_step},
              {"topk", c.topk},
              {"beta", c.beta},
              {"dropout", c.dropout},
              {"ablation", c.ablation},
              {"split", c.split},
              {"scaler", c.scaler},
              {"mask_threshold", c.mask_threshold},
              {"epochs", c.epochs},
              {"batch", c.batch},
              {"lr", c.lr},
              {"lr_decay_gamma", c.lr_decay_gamma},
              {"lr_decay_step", c.lr_decay_step},
              {"clip_norm", c.clip_norm},
              {"seed", c.seed}};
}

void apply_config_file(RunConfig& c, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  json j;
  in >> j;
  if (!j.is_object()) throw std::runtime_error("config file must hold a flat JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "data") c.data = value.get<std::string>();
    else if (key == "out") c.out = value.get<std::string>();
    else if (key == "mode") c.mode = value.get<std::string>();
    else if (key == "input_len") c.input_len = value.get<std::size_t>();
    else if (key == "horizon") c.horizon = value.get<std::size_t>();
    else if (key == "hidden") c.hidden = value.get<std::size_t>();
    else if (key == "embed_dim") c.embed_dim = value.get<std::size_t>();
    else if (key == "decoder_hidden") c.decoder_hidden = value.get<std::size_t>();
    else if (key == "dilation_factor") c.dilation_factor = value.get<long long>();
    else if (key == "widths") c.widths = value.get<std::string>();
    else if (key == "cta_method") c.cta_method = value.get<std::string>();
    else if (key == "cta_time") c.cta_time = value.get<double>();
    else if (key == "cta_step") c.cta_step = value.get<double>();
    else if (key == "cgp_method") c.cgp_method = value.get<std::string>();
    else if (key == "cgp_time") c.cgp_time = value.get<double>();
    else if (key == "cgp_step") c.cgp_step = value.get<double>();
    else if (key == "topk") c.topk = value.get<std::size_t>();
    else if (key == "beta") c.beta = value.get<double>();
    else if (key == "dropout") c.dropout = value.get<double>();
    else if (key == "ablation") c.ablation = value.get<std::string>();
    else if (key == "split") c.split = value.get<std::string>();
    else if (key == "scaler") c.scaler = value.get<std::string>();
    else if (key == "mask_threshold") c.mask_threshold = value.get<double>();
    else if (key == "epochs") c.epochs = value.get<int>();
    else if (key == "batch") c.batch = value.get<std::size_t>();
    else if (key == "lr") c.lr = value.get<double>();
    else if (key == "lr_decay_gamma") c.lr_decay_gamma = value.get<double>();
    else if (key == "lr_decay_step") c.lr_decay_step = value.get<int>();
    else if (key == "clip_norm") c.clip_norm = value.get<double>();
    else if (key == "seed") c.seed = value.get<std::uint64_t>();
    else throw std::runtime_error("unknown config key '" + key + "'");
  }
}

void add_run_options(CLI::App* cmd, RunConfig& c) {
  cmd->add_option("--data", c.data, "input series CSV (one timestep per row)");
  cmd->add_option("--out", c.out, "output directory");
  cmd->add_option("--mode", c.mode, "single_step | multi_step");
  cmd->add_option("--input-len", c.input_len, "input window length T");
  cmd->add_option("--horizon", c.horizon, "forecasting horizon H");
  cmd->add_option("--hidden", c.hidden, "encoder hidden dims D'");
  cmd->add_option("--embed-dim", c.embed_dim, "graph learner embedding dims");
  cmd->add_option("--decoder-hidden", c.decoder_hidden, "decoder hidden dims");
  cmd->add_option("--dilation-factor", c.dilation_factor, "dilation factor r");
  cmd->add_option("--widths", c.widths, "kernel widths, comma separated");
  cmd->add_option("--cta-method", c.cta_method, "temporal solver: euler | rk4");
  cmd->add_option("--cta-time", c.cta_time, "temporal integration time");
  cmd->add_option("--cta-step", c.cta_step, "temporal step size");
  cmd->add_option("--cgp-method", c.cgp_method, "spatial solver: euler | rk4");
  cmd->add_option("--cgp-time", c.cgp_time, "spatial integration time");
  cmd->add_option("--cgp-step", c.cgp_step, "spatial step size");
  cmd->add_option("--topk", c.topk, "edges kept per row of the learned graph");
  cmd->add_option("--beta", c.beta, "graph learner saturation rate");
  cmd->add_option("--dropout", c.dropout, "dropout rate");
  cmd->add_option("--ablation", c.ablation,
                  "comma list of no_cgp,no_cta,no_gsl,no_attn,fully_discrete");
  cmd->add_option("--split", c.split, "train,val,test fractions or 'auto'");
  cmd->add_option("--scaler", c.scaler, "max_abs | z_score | auto");
  cmd->add_option("--mask-threshold", c.mask_threshold,
                  "|truth| threshold for multi-step metrics");
  cmd->add_option("--epochs", c.epochs, "training epochs");
  cmd->add_option("--batch", c.batch, "batch size");
  cmd->add_option("--lr", c.lr, "base learning rate");
  cmd->add_option("--lr-decay-gamma", c.lr_decay_gamma, "multiplicative lr decay (1 = off)");
  cmd->add_option("--lr-decay-step", c.lr_decay_step, "epochs per decay step");
  cmd->add_option("--clip-norm", c.clip_norm, "global gradient-norm clip (<=0 = off)");
  cmd->add_option("--seed", c.seed, "run seed");
}

std::array<double, 3> resolve_split(const RunConfig& c) {
  if (c.split == "auto") {
    return c.mode == "multi_step" ? std::array<double, 3>{0.7, 0.1, 0.2}
                                  : std::array<double, 3>{0.6, 0.2, 0.2};
  }
  auto f = parse_double_list(c.split);
  if (f.size() != 3) throw std::runtime_error("split must be three comma-separated fractions");
  return {f[0], f[1], f[2]};
}

Scaler::Kind resolve_scaler(const RunConfig& c) {
  if (c.scaler == "auto") {
    return c.mode == "multi_step" ? Scaler::Kind::z_score : Scaler::Kind::max_abs;
  }
  return scaler_kind_from_string(c.scaler);
}

ModelConfig to_model_config(const RunConfig& c, std::size_t nodes) {
  ModelConfig m;
  m.nodes = nodes;
  m.in_features = 1;
  m.hidden = c.hidden;
  m.embed_dim = c.embed_dim;
  m.input_len = c.input_len;
  m.horizon = c.horizon;
  m.mode = forecast_mode_from_string(c.mode);
  m.dilation_factor = c.dilation_factor;
  m.widths = parse_size_list(c.widths);
  m.cta.method = c.cta_method == "rk4" ? SolverSpec::Method::rk4 : SolverSpec::Method::euler;
  m.cta.terminal_time = c.cta_time;
  m.cta.step_size = c.cta_step;
  m.cgp.method = c.cgp_method == "rk4" ? SolverSpec::Method::rk4 : SolverSpec::Method::euler;
  m.cgp.terminal_time = c.cgp_time;
  m.cgp.step_size = c.cgp_step;
  m.topk = c.topk;
  m.beta = c.beta;
  m.dropout_rate = c.dropout;
  m.decoder_hidden = c.decoder_hidden;
  m.ablation = AblationFlags::from_names(parse_name_list(c.ablation));
  return m;
}

fs::path resolve_out_dir(const RunConfig& c) {
  const char* env = std::getenv("ODECAST_OUT_DIR");
  fs::path dir = env && *env ? fs::path(env) : fs::path(c.out);
  fs::create_directories(dir);
  return dir;
}

void echo_config(const RunConfig& c, const fs::path& dir) {
  std::ofstream out(dir / "config.json");
  out << run_config_to_json(c).dump(2) << '\n';
}

std::string variant_name(const AblationFlags& flags) {
  auto names = flags.names();
  if (names.empty()) return "full";
  std::string joined;
  for (const auto& n : names) {
    if (!joined.empty()) joined += '+';
    joined += n;
  }
  return joined;
}

struct PreparedData {
  Scaler scaler;
  WindowDataset train, val, test;
};

PreparedData prepare_data(const RunConfig& c, const SeriesMatrix& raw) {
  auto fractions = resolve_split(c);
  auto splits = split_chronological(raw, fractions[0], fractions[1], fractions[2]);
  PreparedData d;
  d.scaler = Scaler::fit(splits[0], resolve_scaler(c));
  const auto mode = forecast_mode_from_string(c.mode);
  d.train = make_windows(d.scaler.transform(splits[0]), c.input_len, c.horizon, mode);
  d.val = make_windows(d.scaler.transform(splits[1]), c.input_len, c.horizon, mode);
  d.test = make_windows(d.scaler.transform(splits[2]), c.input_len, c.horizon, mode);
  return d;
}

// Inverse-transformed model predictions over a dataset, one row per window.
// Multi-step rows hold node-major [N x H] blocks.
std::vector<double> predict_all(const Model& model, const WindowDataset& ds,
                                const Scaler& scaler) {
  const std::size_t n = ds.nodes();
  const std::size_t h = ds.mode == ForecastMode::multi_step ? ds.horizon : 1;
  std::vector<double> out(ds.size() * n * h);
  const std::size_t chunk = 64;
  for (std::size_t begin = 0; begin < ds.size(); begin += chunk) {
    const std::size_t end = std::min(begin + chunk, ds.size());
    std::vector<std::size_t> idx(end - begin);
    std::iota(idx.begin(), idx.end(), begin);
    Tensor pred = model.forward(ds.inputs(idx));
    const auto& pv = pred.values();
    for (std::size_t w = 0; w < idx.size(); ++w)
      for (std::size_t node = 0; node < n; ++node)
        for (std::size_t step = 0; step < h; ++step) {
          const double v = pv[(w * n + node) * h + step];
          out[((begin + w) * n + node) * h + step] = scaler.inverse_value(v, node);
        }
  }
  return out;
}

std::vector<double> truth_all(const WindowDataset& ds, const Scaler& scaler) {
  const std::size_t n = ds.nodes();
  const std::size_t h = ds.mode == ForecastMode::multi_step ? ds.horizon : 1;
  std::vector<double> out(ds.size() * n * h);
  for (std::size_t w = 0; w < ds.size(); ++w) {
    const std::size_t row0 = ds.target_begin(w);
    for (std::size_t node = 0; node < n; ++node)
      for (std::size_t step = 0; step < h; ++step)
        out[(w * n + node) * h + step] =
            scaler.inverse_value(ds.series.at(row0 + step, node), node);
  }
  return out;
}

MetricReport evaluate_report(const Model& model, const WindowDataset& test,
                             const Scaler& scaler, const RunConfig& c) {
  MetricReport report;
  report.protocol = c.mode;
  report.variant = variant_name(model.config().ablation);
  const std::size_t n = test.nodes();
  std::vector<double> pred = predict_all(model, test, scaler);
  std::vector<double> truth = truth_all(test, scaler);

  if (model.config().mode == ForecastMode::single_step) {
    auto m = single_step_metrics(pred, truth, test.size(), n);
    MetricReport::Row row;
    row.horizon = c.horizon;
    row.samples = m.samples;
    row.values = {{"rse", m.rse}, {"corr", m.corr}};
    report.rows.push_back(std::move(row));
    return report;
  }

  const std::size_t h = test.horizon;
  for (std::size_t target : {std::size_t{3}, std::size_t{6}, std::size_t{12}}) {
    if (target > h) continue;
    std::vector<double> ph(test.size() * n), th(test.size() * n);
    for (std::size_t w = 0; w < test.size(); ++w)
      for (std::size_t node = 0; node < n; ++node) {
        ph[w * n + node] = pred[(w * n + node) * h + target - 1];
        th[w * n + node] = truth[(w * n + node) * h + target - 1];
      }
    auto m = multi_step_metrics(ph, th, test.size(), n, c.mask_threshold);
    MetricReport::Row row;
    row.horizon = target;
    row.samples = m.used_cells;
    row.values = {{"mae", m.mae}, {"rmse", m.rmse}, {"mape", m.mape}};
    report.rows.push_back(std::move(row));
  }
  if (report.rows.empty()) throw std::runtime_error("no reportable horizon <= H");
  return report;
}

void write_report(const MetricReport& report, const fs::path& dir) {
  {
    std::ofstream out(dir / "metrics.json");
    out << report.to_json().dump(2) << '\n';
  }
  std::ofstream out(dir / "metrics.csv");
  out << report.to_csv();
}

void write_adjacency_csv(const Model& model, const fs::path& path) {
  const Tensor a = model.adjacency().raw;
  const std::size_t n = a.dim(0);
  std::ofstream out(path);
  out.precision(12);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (j) out << ',';
      out << a.values()[i * n + j];
    }
    out << '\n';
  }
}

int cmd_train(const RunConfig& c) {
  if (c.data.empty()) throw std::runtime_error("train: --data is required");
  fs::path dir = resolve_out_dir(c);
  echo_config(c, dir);

  SeriesMatrix raw = load_matrix_csv(c.data);
  if (raw.dropped_nan_rows > 0) {
    std::cerr << "dropped " << raw.dropped_nan_rows << " rows containing NaN\n";
  }
  PreparedData d = prepare_data(c, raw);
  if (d.train.size() == 0 || d.val.size() == 0 || d.test.size() == 0) {
    throw std::runtime_error("a data split yields no windows; series too short");
  }
  std::cout << "data: " << raw.rows << " rows x " << raw.cols << " nodes; windows "
            << d.train.size() << "/" << d.val.size() << "/" << d.test.size() << "\n";

  Model model(to_model_config(c, raw.cols), c.seed);
  std::cout << "model: " << model.parameter_count() << " parameters ("
            << model.attentive_parameter_count() << " attentive), variant "
            << variant_name(model.config().ablation) << "\n";

  TrainRun run;
  run.epochs = c.epochs;
  run.batch_size = c.batch;
  run.base_lr = c.lr;
  run.decay_gamma = c.lr_decay_gamma;
  run.decay_step = c.lr_decay_step;
  run.clip_norm = c.clip_norm;
  run.seed = c.seed;
  TrainResult result = train(model, d.train, d.val, run);
  for (const EpochStats& e : result.history) {
    std::cout << "epoch " << e.epoch << ": lr " << e.lr << ", train MAE " << e.train_mae
              << ", val MAE " << e.val_mae << " (" << e.wall_seconds << " s)\n";
  }

  {
    std::ofstream log(dir / "training_log.csv");
    log << history_csv(result.history);
  }
  model.save((dir / "checkpoint.json").string());
  write_adjacency_csv(model, dir / "adjacency.csv");

  MetricReport report = evaluate_report(model, d.test, d.scaler, c);
  write_report(report, dir);
  std::cout << report.to_csv();
  return 0;
}

int cmd_eval(const RunConfig& c, const std::string& checkpoint) {
  if (c.data.empty()) throw std::runtime_error("eval: --data is required");
  Model model = Model::load(checkpoint);
  RunConfig rc = c;
  rc.mode = to_string(model.config().mode);
  rc.input_len = model.config().input_len;
  rc.horizon = model.config().horizon;

  fs::path dir = resolve_out_dir(rc);
  echo_config(rc, dir);
  SeriesMatrix raw = load_matrix_csv(rc.data);
  if (raw.cols != model.config().nodes) {
    throw std::runtime_error("eval: dataset has " + std::to_string(raw.cols) +
                             " nodes, checkpoint expects " +
                             std::to_string(model.config().nodes));
  }
  PreparedData d = prepare_data(rc, raw);
  MetricReport report = evaluate_report(model, d.test, d.scaler, rc);
  write_report(report, dir);
  std::cout << report.to_csv();
  return 0;
}

int cmd_forecast(const RunConfig& c, const std::string& checkpoint) {
  if (c.data.empty()) throw std::runtime_error("forecast: --data is required");
  Model model = Model::load(checkpoint);
  RunConfig rc = c;
  rc.mode = to_string(model.config().mode);
  rc.input_len = model.config().input_len;
  rc.horizon = model.config().horizon;

  fs::path dir = resolve_out_dir(rc);
  echo_config(rc, dir);
  SeriesMatrix raw = load_matrix_csv(rc.data);
  PreparedData d = prepare_data(rc, raw);
  std::vector<double> pred = predict_all(model, d.test, d.scaler);
  std::vector<double> truth = truth_all(d.test, d.scaler);

  const std::size_t n = d.test.nodes();
  const std::size_t h = model.config().mode == ForecastMode::multi_step ? rc.horizon : 1;
  std::ofstream out(dir / "forecasts.csv");
  out.precision(12);
  out << "window";
  for (std::size_t node = 0; node < n; ++node)
    for (std::size_t step = 1; step <= h; ++step)
      out << ",pred_n" << node << "_h" << step << ",truth_n" << node << "_h" << step;
  out << '\n';
  for (std::size_t w = 0; w < d.test.size(); ++w) {
    out << w;
    for (std::size_t node = 0; node < n; ++node)
      for (std::size_t step = 0; step < h; ++step) {
        const std::size_t i = (w * n + node) * h + step;
        out << ',' << pred[i] << ',' << truth[i];
      }
    out << '\n';
  }
  std::cout << "wrote " << d.test.size() << " forecasts to " << (dir / "forecasts.csv") << "\n";
  return 0;
}

int cmd_synth(const RunConfig& c, const SynthSpec& spec) {
  fs::path dir = resolve_out_dir(c);
  echo_config(c, dir);
  SynthResult result = synth_generate(spec);
  write_matrix_csv(result.series, (dir / "synth.csv").string());
  json edges = json::array();
  for (const auto& [u, v] : result.edges) edges.push_back({u, v});
  std::ofstream out(dir / "edges.json");
  out << json{{"edges", edges}}.dump(2) << '\n';
  std::cout << "wrote " << result.series.rows << "x" << result.series.cols << " series to "
            << (dir / "synth.csv") << "\n";
  return 0;
}

int cmd_verify(const std::string& suite) {
  auto results = verify_suite(suite);
  const int failures = print_results(results, std::cout);
  if (failures > 0) {
    std::cout << failures << " of " << results.size() << " checks failed\n";
    return 2;
  }
  std::cout << "all " << results.size() << " checks passed\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"continuous spatial-temporal forecasting over a learned graph"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string config_path, checkpoint, suite = "all";
  SynthSpec synth_spec;

  // The config file is applied before flag parsing so flags win.
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--config") config_path = argv[i + 1];
  }

  auto* train_cmd = app.add_subcommand("train", "train a model and write run artifacts");
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
  auto* forecast_cmd = app.add_subcommand("forecast", "write per-window forecasts");
  auto* synth_cmd = app.add_subcommand("synth", "generate the synthetic coupled-lag dataset");
  auto* verify_cmd = app.add_subcommand("verify", "run the numerical verification suites");

  for (CLI::App* cmd : {train_cmd, eval_cmd, forecast_cmd}) {
    cmd->add_option("--config", config_path, "flat JSON config file");
    add_run_options(cmd, cfg);
  }
  eval_cmd->add_option("--checkpoint", checkpoint, "model checkpoint")->required();
  forecast_cmd->add_option("--checkpoint", checkpoint, "model checkpoint")->required();

  synth_cmd->add_option("--config", config_path, "flat JSON config file");
  synth_cmd->add_option("--out", cfg.out, "output directory");
  synth_cmd->add_option("--nodes", synth_spec.nodes, "number of series");
  synth_cmd->add_option("--steps", synth_spec.steps, "number of timesteps");
  synth_cmd->add_option("--lag", synth_spec.lag, "chain lag");
  synth_cmd->add_option("--coupling", synth_spec.coupling, "lagged parent weight");
  synth_cmd->add_option("--season", synth_spec.season, "per-node sinusoid weight");
  synth_cmd->add_option("--noise", synth_spec.noise, "innovation std-dev");
  synth_cmd->add_option("--seed", synth_spec.seed, "generator seed");

  verify_cmd->add_option("--suite", suite, "cgp | cta | gradients | oversmoothing | bound | all");

  try {
    if (!config_path.empty()) apply_config_file(cfg, config_path);
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }

  try {
    if (*train_cmd) return cmd_train(cfg);
    if (*eval_cmd) return cmd_eval(cfg, checkpoint);
    if (*forecast_cmd) return cmd_forecast(cfg, checkpoint);
    if (*synth_cmd) return cmd_synth(cfg, synth_spec);
    if (*verify_cmd) return cmd_verify(suite);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
