// wunt: weighting-by-uniform-transformer estimation of the average
// treatment effect on the treated, with a deterministic simulation and
// benchmarking harness.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include <nlohmann/json.hpp>

#include "wunt/wunt.hpp"

namespace {

using nlohmann::json;

enum ExitCode : int {
  exit_ok = 0,
  exit_config = 2,
  exit_schema = 3,
  exit_numeric = 4,
  exit_io = 5,
};

struct CommonOptions {
  int threads = wunt::default_thread_count();
  bool json_errors = false;
  std::string config_path;
};

//! Tuning keys shared by estimate/simulate/bench; every key has a
//! documented default and unknown keys are rejected. Unset fields keep
//! the subcommand's baseline (the library defaults for estimate, the
//! per-model study presets for simulate, the smooth-surface preset for
//! bench).
struct TuningOptions {
  int kernel_order = 0;               // 0 = unset
  std::vector<double> kernel_bandwidth; // empty = unset
  std::string basis_family;           // "" = unset
  long basis_count = 0;               // 0 = unset
  double alpha = 0.0;                 // 0 = unset
  double beta = 0.0;
  double scale_c = 0.0;
  std::string n_rule;                 // "" = unset
  double margin = -1.0;               // <0 = unset
};

struct TuningBindings {
  CLI::Option* kernel_order = nullptr;
  CLI::Option* kernel_bandwidth = nullptr;
  CLI::Option* basis_family = nullptr;
  CLI::Option* basis_count = nullptr;
  CLI::Option* alpha = nullptr;
  CLI::Option* beta = nullptr;
  CLI::Option* scale_c = nullptr;
  CLI::Option* n_rule = nullptr;
  CLI::Option* margin = nullptr;
};

TuningBindings add_tuning_options(CLI::App* cmd, TuningOptions& opts,
                                  const std::string& baseline)
{
  TuningBindings b;
  b.kernel_order = cmd->add_option(
    "--kernel.order", opts.kernel_order,
    "Kernel order 2/4/6 (default: smallest order covering alpha+beta)");
  b.kernel_bandwidth =
    cmd->add_option("--kernel.bandwidth", opts.kernel_bandwidth,
                    "Bandwidth override, scalar or one value per dimension "
                    "(default: rule c*n^(-2/(d+2(alpha+beta))))")
      ->delimiter(',');
  b.basis_family = cmd->add_option(
    "--basis.family", opts.basis_family,
    "Projection basis family, cosine or haar (default: " + baseline + ")");
  b.basis_count = cmd->add_option(
    "--basis.count", opts.basis_count,
    "Basis count L override (default: rule c*n^(2d/(d+2(alpha+beta))))");
  b.alpha = cmd->add_option("--smoothness.alpha", opts.alpha,
                            "Response smoothness alpha (default: " +
                              baseline + ")");
  b.beta = cmd->add_option("--smoothness.beta", opts.beta,
                           "Density smoothness beta (default: " + baseline +
                             ")");
  b.scale_c = cmd->add_option("--scale.c", opts.scale_c,
                              "Scale constant c in the tuning rules "
                              "(default: 1.0)");
  b.n_rule = cmd->add_option("--tuning.n", opts.n_rule,
                             "Sample size the tuning rules use: total "
                             "(default), control or treated");
  b.margin = cmd->add_option("--margin", opts.margin,
                             "Rescale margin epsilon in [0, 0.1] "
                             "(default: 0.01)");
  return b;
}

//! Applies --config JSON: known keys override defaults, explicit CLI
//! flags still win, unknown keys are rejected.
void apply_config_file(const std::string& path, TuningOptions& opts,
                       const TuningBindings& b)
{
  std::ifstream in(path);
  if (!in) {
    throw wunt::io_error("cannot open config '" + path + "'");
  }
  json cfg;
  try {
    in >> cfg;
  } catch (const json::parse_error& err) {
    throw wunt::config_error("config '" + path + "': " + err.what());
  }
  if (!cfg.is_object()) {
    throw wunt::config_error("config must be a JSON object");
  }
  for (const auto& [key, value] : cfg.items()) {
    try {
      if (key == "kernel.order") {
        if (b.kernel_order->count() == 0) {
          opts.kernel_order = value.get<int>();
        }
      } else if (key == "kernel.bandwidth") {
        if (b.kernel_bandwidth->count() == 0) {
          if (value.is_array()) {
            opts.kernel_bandwidth = value.get<std::vector<double>>();
          } else {
            opts.kernel_bandwidth = { value.get<double>() };
          }
        }
      } else if (key == "basis.family") {
        if (b.basis_family->count() == 0) {
          opts.basis_family = value.get<std::string>();
        }
      } else if (key == "basis.count") {
        if (b.basis_count->count() == 0) {
          opts.basis_count = value.get<long>();
        }
      } else if (key == "smoothness.alpha") {
        if (b.alpha->count() == 0) {
          opts.alpha = value.get<double>();
        }
      } else if (key == "smoothness.beta") {
        if (b.beta->count() == 0) {
          opts.beta = value.get<double>();
        }
      } else if (key == "scale.c") {
        if (b.scale_c->count() == 0) {
          opts.scale_c = value.get<double>();
        }
      } else if (key == "tuning.n") {
        if (b.n_rule->count() == 0) {
          opts.n_rule = value.get<std::string>();
        }
      } else if (key == "margin") {
        if (b.margin->count() == 0) {
          opts.margin = value.get<double>();
        }
      } else {
        throw wunt::config_error("config '" + path + "': unknown key '" +
                                 key + "'");
      }
    } catch (const json::exception& err) {
      throw wunt::config_error("config '" + path + "', key '" + key +
                               "': " + err.what());
    }
  }
}

//! Overlays only the user-set tuning keys on a spec that already carries
//! its baseline defaults.
void fill_spec_tuning(wunt::EstimatorSpec& spec, const TuningOptions& t)
{
  if (t.alpha > 0.0) {
    spec.alpha = t.alpha;
  }
  if (t.beta > 0.0) {
    spec.beta = t.beta;
  }
  if (t.scale_c > 0.0) {
    spec.scale_c = t.scale_c;
  }
  if (t.kernel_order > 0) {
    spec.kernel_order = t.kernel_order;
  }
  if (t.basis_count > 0) {
    spec.basis_count = t.basis_count;
  }
  if (!t.basis_family.empty()) {
    spec.basis_family = wunt::basis_family_from_string(t.basis_family);
  }
  if (!t.n_rule.empty()) {
    spec.n_rule = wunt::sample_size_rule_from_string(t.n_rule);
  }
  if (t.margin >= 0.0) {
    spec.margin = t.margin;
  }
  if (!t.kernel_bandwidth.empty()) {
    spec.bandwidth = Eigen::Map<const Eigen::VectorXd>(
      t.kernel_bandwidth.data(),
      static_cast<Eigen::Index>(t.kernel_bandwidth.size()));
  }
}

struct InputOptions {
  std::string path;
  std::string treatment = "Z";
  std::string outcome = "Y";
  bool no_outcome = false;
  std::vector<std::string> covariates;
  std::string unlabeled_path;
};

void add_input_options(CLI::App* cmd, InputOptions& opts, bool need_outcome)
{
  cmd->add_option("--input", opts.path, "Input CSV (header row required)")
    ->required();
  cmd->add_option("--treatment", opts.treatment,
                  "Treatment column, values 0/1")
    ->capture_default_str();
  cmd->add_option("--outcome", opts.outcome, "Outcome column")
    ->capture_default_str();
  if (!need_outcome) {
    cmd->add_flag("--no-outcome", opts.no_outcome,
                  "Input has no outcome column");
  }
  cmd->add_option("--covariates", opts.covariates,
                  "Covariate columns (default: all other columns)")
    ->delimiter(',');
  cmd->add_option("--unlabeled", opts.unlabeled_path,
                  "Extra unlabeled control CSV (covariates + treatment "
                  "column of zeros)");
}

wunt::Dataset load_input(const InputOptions& opts)
{
  std::optional<std::string> outcome;
  if (!opts.no_outcome) {
    outcome = opts.outcome;
  }
  return wunt::load_csv(opts.path, opts.treatment, outcome, opts.covariates);
}

std::optional<wunt::Dataset> load_unlabeled(const InputOptions& opts)
{
  if (opts.unlabeled_path.empty()) {
    return std::nullopt;
  }
  wunt::Dataset pool = wunt::load_csv(opts.unlabeled_path, opts.treatment,
                                      std::nullopt, opts.covariates);
  if (pool.n1() != 0) {
    throw wunt::schema_error("unlabeled dataset must contain only control "
                             "rows (treatment 0)");
  }
  return pool;
}

//! Simple rectangular table; CSV is the source of truth and the Markdown
//! rendering is derived from the written CSV file.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

void write_table_csv(const Table& table, const std::string& path)
{
  std::ofstream out(path);
  if (!out) {
    throw wunt::io_error("cannot write '" + path + "'");
  }
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    out << (i == 0 ? "" : ",") << table.header[i];
  }
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      out << (i == 0 ? "" : ",") << row[i];
    }
    out << '\n';
  }
  if (!out) {
    throw wunt::io_error("write failed for '" + path + "'");
  }
}

void render_markdown_from_csv(const std::string& csv_path)
{
  std::ifstream in(csv_path);
  if (!in) {
    throw wunt::io_error("cannot reopen '" + csv_path + "'");
  }
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) {
      rows.push_back(wunt::detail::split_csv_line(line));
    }
  }
  if (rows.empty()) {
    throw wunt::io_error("'" + csv_path + "' is empty");
  }
  std::filesystem::path md_path(csv_path);
  md_path.replace_extension(".md");
  std::ofstream out(md_path);
  if (!out) {
    throw wunt::io_error("cannot write '" + md_path.string() + "'");
  }
  auto emit_row = [&](const std::vector<std::string>& cells) {
    out << '|';
    for (const auto& cell : cells) {
      out << ' ' << cell << " |";
    }
    out << '\n';
  };
  emit_row(rows[0]);
  out << '|';
  for (std::size_t i = 0; i < rows[0].size(); ++i) {
    out << " --- |";
  }
  out << '\n';
  for (std::size_t i = 1; i < rows.size(); ++i) {
    emit_row(rows[i]);
  }
  std::cout << "wrote " << md_path.string() << '\n';
}

std::string fmt(double v)
{
  return wunt::detail::format_number(v);
}

// ---------------------------------------------------------------- estimate

struct EstimateArgs {
  InputOptions input;
  TuningOptions tuning;
  std::string estimator = "kernel";
  std::string transformer = "adaptive";
  std::string out_path;
  std::string weights_path;
  bool clip_negative = false;
};

int run_estimate(const EstimateArgs& args)
{
  const wunt::Dataset ds = load_input(args.input);
  const auto unlabeled = load_unlabeled(args.input);

  wunt::EstimatorSpec spec;
  spec.label = args.estimator + "+" + args.transformer;
  if (args.estimator == "kernel") {
    spec.kind = wunt::EstimatorKind::kernel;
  } else if (args.estimator == "projection") {
    spec.kind = wunt::EstimatorKind::projection;
  } else if (args.estimator == "ipw" || args.estimator == "ipw-logistic") {
    spec.kind = wunt::EstimatorKind::ipw_logistic;
    spec.label = "ipw-logistic";
  } else {
    throw wunt::config_error("unknown estimator '" + args.estimator + "'");
  }
  spec.transformer = wunt::transformer_kind_from_string(args.transformer);
  spec.use_extra = unlabeled.has_value();
  fill_spec_tuning(spec, args.tuning);

  const wunt::EstimateReport report =
    wunt::run_estimator(spec, ds, unlabeled);

  json out;
  out["mu_ct_hat"] = report.mu_ct_hat;
  out["tau_att_hat"] = report.tau_att_hat;
  out["estimator"] = wunt::to_string(report.kind);
  json config = report.config;
  config["transformer"] = args.transformer;
  config["tuning.n"] = args.tuning.n_rule;
  config["margin"] = args.tuning.margin;
  out["config"] = config;
  out["n0"] = report.n0;
  out["n1"] = report.n1;
  out["seconds"] = report.seconds;

  if (args.out_path.empty()) {
    std::cout << out.dump(2) << '\n';
  } else {
    std::ofstream file(args.out_path);
    if (!file) {
      throw wunt::io_error("cannot write '" + args.out_path + "'");
    }
    file << out.dump(2) << '\n';
    std::cout << "wrote " << args.out_path << '\n';
  }
  if (!args.weights_path.empty()) {
    wunt::export_weights(report, ds, args.weights_path, args.clip_negative);
    std::cout << "wrote " << args.weights_path << '\n';
  }
  return exit_ok;
}

// --------------------------------------------------------------- transform

struct TransformArgs {
  InputOptions input;
  std::string transformer = "adaptive";
  double margin = 0.01;
  std::string out_path;
  std::string partition_path;
};

int run_transform(const TransformArgs& args)
{
  const wunt::Dataset ds = load_input(args.input);
  const auto unlabeled = load_unlabeled(args.input);
  const auto kind = wunt::transformer_kind_from_string(args.transformer);
  const wunt::UniformTransformer transformer =
    wunt::make_transformer(kind, ds, unlabeled, args.margin);
  const wunt::Dataset transformed = wunt::transform_dataset(transformer, ds);
  wunt::write_csv(transformed, args.out_path);
  std::cout << "wrote " << args.out_path << '\n';
  if (!args.partition_path.empty()) {
    if (kind != wunt::TransformerKind::adaptive) {
      throw wunt::config_error("--partition-out needs the adaptive "
                               "transformer");
    }
    std::ofstream out(args.partition_path);
    if (!out) {
      throw wunt::io_error("cannot write '" + args.partition_path + "'");
    }
    out << transformer.partition().to_json().dump(2) << '\n';
    std::cout << "wrote " << args.partition_path << '\n';
  }
  return exit_ok;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  TuningOptions tuning;
  std::string model = "y1";
  double rho = 0.0;
  long n1 = 500;
  long n0 = 1000;
  long n = 1000;
  long unlabeled = 10000;
  int reps = 100;
  std::uint64_t seed = 20240;
  std::vector<std::string> estimators = { "kernel+joint", "kernel+marginal",
                                          "projection+joint",
                                          "projection+marginal", "ipw" };
  std::string out_path;
  bool markdown = false;
};

int run_simulate(const SimulateArgs& args)
{
  wunt::SimConfig cfg;
  cfg.model = wunt::sim_model_from_string(args.model);
  cfg.rho = args.rho;
  cfg.n1 = args.n1;
  cfg.n0 = args.n0;
  cfg.n = args.n;
  cfg.unlabeled = args.unlabeled;

  std::vector<wunt::EstimatorSpec> specs;
  for (const auto& token : args.estimators) {
    wunt::EstimatorSpec spec = wunt::study_estimator_spec(cfg.model, token);
    fill_spec_tuning(spec, args.tuning);
    specs.push_back(std::move(spec));
  }

  const wunt::ReplicationResult result =
    wunt::run_replications(cfg, specs, args.reps, args.seed);

  Table table;
  table.header = { "estimator", "bias", "rmse", "reps_used", "failures" };
  for (const auto& cell : result.cells) {
    table.rows.push_back({ cell.label,
                           cell.failed_cell ? "failed" : fmt(cell.bias),
                           cell.failed_cell ? "failed" : fmt(cell.rmse),
                           std::to_string(cell.reps_used),
                           std::to_string(cell.failures) });
  }
  if (args.out_path.empty()) {
    for (const auto& cell : result.cells) {
      std::cout << cell.label << ": bias=" << fmt(cell.bias)
                << " rmse=" << fmt(cell.rmse) << " reps=" << cell.reps_used
                << " failures=" << cell.failures << '\n';
    }
  } else {
    write_table_csv(table, args.out_path);
    std::cout << "wrote " << args.out_path << '\n';
    if (args.markdown) {
      render_markdown_from_csv(args.out_path);
    }
  }
  return exit_ok;
}

// ------------------------------------------------------------------- bench

struct BenchArgs {
  TuningOptions tuning;
  std::string model = "y3";
  std::vector<long> sizes = { 1000, 2000, 5000 };
  int reps = 10;
  std::uint64_t seed = 20240;
  std::vector<std::string> estimators = { "kernel+joint", "projection+joint",
                                          "ipw" };
  std::string out_path;
  bool markdown = false;
};

int run_bench(const BenchArgs& args)
{
  wunt::SimConfig cfg;
  cfg.model = wunt::sim_model_from_string(args.model);

  std::vector<wunt::EstimatorSpec> specs;
  for (const auto& token : args.estimators) {
    wunt::EstimatorSpec spec = wunt::parse_estimator_spec(token);
    // timing preset: the Y3 surface is very smooth
    spec.alpha = 4.0;
    spec.beta = 4.0;
    fill_spec_tuning(spec, args.tuning);
    specs.push_back(std::move(spec));
  }
  std::vector<Eigen::Index> sizes(args.sizes.begin(), args.sizes.end());

  const wunt::BenchResult result =
    wunt::timing_bench(cfg, sizes, specs, args.reps, args.seed);

  Table table;
  table.header = { "estimator", "n", "mean_seconds", "loglog_slope" };
  for (const auto& entry : result.entries) {
    double slope = 0.0;
    for (const auto& [label, s] : result.slopes) {
      if (label == entry.label) {
        slope = s;
      }
    }
    table.rows.push_back({ entry.label, std::to_string(entry.n),
                           fmt(entry.mean_seconds), fmt(slope) });
  }
  if (args.out_path.empty()) {
    for (const auto& row : table.rows) {
      std::cout << row[0] << " n=" << row[1] << " seconds=" << row[2]
                << " slope=" << row[3] << '\n';
    }
  } else {
    write_table_csv(table, args.out_path);
    std::cout << "wrote " << args.out_path << '\n';
    if (args.markdown) {
      render_markdown_from_csv(args.out_path);
    }
  }
  return exit_ok;
}

// ------------------------------------------------------------- demo-warmup

struct WarmupArgs {
  long n = 4000;
  int reps = 50;
  std::string response = "rough";
  double beta = 1.0;
  double grid_min = 0.002;
  double grid_max = 0.5;
  int grid_points = 10;
  std::uint64_t seed = 20240;
  std::string out_path;
  bool markdown = false;
};

int run_demo_warmup(const WarmupArgs& args)
{
  wunt::WarmupConfig cfg;
  cfg.n0 = args.n / 2;
  cfg.n1 = args.n - cfg.n0;
  cfg.reps = args.reps;
  cfg.beta = args.beta;
  cfg.seed = args.seed;
  if (args.response == "rough") {
    cfg.response = wunt::WarmupResponse::rough;
  } else if (args.response == "smooth") {
    cfg.response = wunt::WarmupResponse::smooth;
  } else {
    throw wunt::config_error("response must be rough or smooth");
  }
  cfg.bandwidth_grid =
    wunt::warmup_default_grid(args.grid_min, args.grid_max, args.grid_points);

  const wunt::WarmupResult result = wunt::run_warmup(cfg);

  Table table;
  table.header = { "h", "mse", "bias", "variance" };
  for (const auto& row : result.rows) {
    table.rows.push_back(
      { fmt(row.bandwidth), fmt(row.mse), fmt(row.bias), fmt(row.variance) });
  }
  std::cout << "true mu_CT = " << fmt(result.true_mu_ct)
            << ", best h = " << fmt(result.best_bandwidth)
            << ", density rule n^(-1/(1+2*beta)) = "
            << fmt(result.density_rule) << '\n';
  if (args.out_path.empty()) {
    for (const auto& row : result.rows) {
      std::cout << "h=" << fmt(row.bandwidth) << " mse=" << fmt(row.mse)
                << '\n';
    }
  } else {
    write_table_csv(table, args.out_path);
    std::cout << "wrote " << args.out_path << '\n';
    if (args.markdown) {
      render_markdown_from_csv(args.out_path);
    }
  }
  return exit_ok;
}

int dispatch_error(const CommonOptions& common, const std::string& type,
                   const std::string& message, int code)
{
  if (common.json_errors) {
    json err;
    err["error"] = { { "type", type }, { "message", message },
                     { "exit_code", code } };
    std::cout << err.dump(2) << '\n';
  }
  std::cerr << "wunt: " << type << ": " << message << '\n';
  return code;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{ "Weighting by uniform transformer: ATT estimation, dataset "
                "transformation and simulation studies" };
  app.require_subcommand(1);
  app.set_version_flag("--version", wunt::version_string);

  CommonOptions common;
  app.add_option("--threads", common.threads,
                 "Worker threads (default: WUNT_THREADS or all cores); "
                 "results are identical for any value")
    ->capture_default_str();
  app.add_flag("--json-errors", common.json_errors,
               "Also emit failures as a JSON error object on stdout");

  EstimateArgs estimate_args;
  auto* estimate =
    app.add_subcommand("estimate", "Estimate mu_CT and tau_ATT from a CSV");
  add_input_options(estimate, estimate_args.input, true);
  estimate->add_option("--estimator", estimate_args.estimator,
                       "kernel, projection or ipw")
    ->capture_default_str();
  estimate->add_option("--transformer", estimate_args.transformer,
                       "adaptive (joint), marginal, plugin or identity")
    ->capture_default_str();
  const TuningBindings estimate_tuning =
    add_tuning_options(estimate, estimate_args.tuning);
  estimate->add_option("--config", common.config_path,
                       "JSON config file with tuning keys");
  estimate->add_option("--out", estimate_args.out_path,
                       "Report JSON path (default: stdout)");
  estimate->add_option("--weights-out", estimate_args.weights_path,
                       "Per-unit weights CSV path");
  estimate->add_flag("--clip-negative", estimate_args.clip_negative,
                     "Clip negative control weights to 0 in the export and "
                     "renormalize");

  TransformArgs transform_args;
  auto* transform = app.add_subcommand(
    "transform", "Apply a uniform transformer and emit the transformed CSV");
  add_input_options(transform, transform_args.input, false);
  transform->add_option("--transformer", transform_args.transformer,
                        "adaptive (joint), marginal, plugin or identity")
    ->capture_default_str();
  transform->add_option("--margin", transform_args.margin,
                        "Rescale margin epsilon in [0, 0.1]")
    ->capture_default_str();
  transform->add_option("--out", transform_args.out_path, "Output CSV path")
    ->required();
  transform->add_option("--partition-out", transform_args.partition_path,
                        "Write the adaptive partition tree as JSON");

  SimulateArgs simulate_args;
  auto* simulate = app.add_subcommand(
    "simulate", "Replicated bias/RMSE study on the built-in models");
  simulate->add_option("--model", simulate_args.model, "y1, y2, y3 or y4")
    ->capture_default_str();
  simulate->add_option("--rho", simulate_args.rho,
                       "AR(1) correlation (y1/y2)")
    ->capture_default_str();
  simulate->add_option("--n1", simulate_args.n1, "Treated size (y1/y2)")
    ->capture_default_str();
  simulate->add_option("--n0", simulate_args.n0, "Control size (y1/y2)")
    ->capture_default_str();
  simulate->add_option("--n", simulate_args.n, "Total size (y3/y4)")
    ->capture_default_str();
  simulate->add_option("--unlabeled-size", simulate_args.unlabeled,
                       "Unlabeled pool size (y1/y2)")
    ->capture_default_str();
  simulate->add_option("--reps", simulate_args.reps, "Replications")
    ->capture_default_str();
  simulate->add_option("--seed", simulate_args.seed, "Base seed")
    ->capture_default_str();
  simulate->add_option("--estimators", simulate_args.estimators,
                       "Estimator specs, e.g. kernel+marginal, "
                       "projection+joint+extra, ipw")
    ->delimiter(',')
    ->capture_default_str();
  const TuningBindings simulate_tuning =
    add_tuning_options(simulate, simulate_args.tuning);
  simulate->add_option("--config", common.config_path,
                       "JSON config file with tuning keys");
  simulate->add_option("--out", simulate_args.out_path,
                       "Bias/RMSE CSV path (default: stdout)");
  simulate->add_flag("--markdown", simulate_args.markdown,
                     "Also render the CSV as Markdown");

  BenchArgs bench_args;
  auto* bench = app.add_subcommand(
    "bench", "Wall-time benchmark across sample sizes (Y3 by default)");
  bench->add_option("--model", bench_args.model, "Model to time")
    ->capture_default_str();
  bench->add_option("--sizes", bench_args.sizes, "Ascending sample sizes")
    ->delimiter(',')
    ->capture_default_str();
  bench->add_option("--reps", bench_args.reps, "Replications per size")
    ->capture_default_str();
  bench->add_option("--seed", bench_args.seed, "Base seed")
    ->capture_default_str();
  bench->add_option("--estimators", bench_args.estimators,
                    "Estimator specs to time")
    ->delimiter(',')
    ->capture_default_str();
  const TuningBindings bench_tuning =
    add_tuning_options(bench, bench_args.tuning, "4.0, smooth surface");
  bench->add_option("--config", common.config_path,
                    "JSON config file with tuning keys");
  bench->add_option("--out", bench_args.out_path,
                    "Timing CSV path (default: stdout)");
  bench->add_flag("--markdown", bench_args.markdown,
                  "Also render the CSV as Markdown");

  WarmupArgs warmup_args;
  auto* warmup = app.add_subcommand(
    "demo-warmup",
    "1-D warm-up: MSE of mu_CT across a bandwidth grid, uniform controls");
  warmup->add_option("--n", warmup_args.n, "Total sample size")
    ->capture_default_str();
  warmup->add_option("--reps", warmup_args.reps, "Replications")
    ->capture_default_str();
  warmup->add_option("--response", warmup_args.response, "rough or smooth")
    ->capture_default_str();
  warmup->add_option("--beta", warmup_args.beta,
                     "Density smoothness for the reference rule")
    ->capture_default_str();
  warmup->add_option("--grid-min", warmup_args.grid_min, "Smallest bandwidth")
    ->capture_default_str();
  warmup->add_option("--grid-max", warmup_args.grid_max, "Largest bandwidth")
    ->capture_default_str();
  warmup->add_option("--grid-points", warmup_args.grid_points,
                     "Grid size (log-spaced)")
    ->capture_default_str();
  warmup->add_option("--seed", warmup_args.seed, "Base seed")
    ->capture_default_str();
  warmup->add_option("--out", warmup_args.out_path,
                     "Output CSV path (default: stdout)");
  warmup->add_flag("--markdown", warmup_args.markdown,
                   "Also render the CSV as Markdown");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    if (err.get_exit_code() == 0) {
      return app.exit(err); // --help / --version
    }
    app.exit(err);
    return exit_config;
  }

  try {
    wunt::set_thread_count(common.threads);
    if (!common.config_path.empty()) {
      if (estimate->parsed()) {
        apply_config_file(common.config_path, estimate_args.tuning,
                          estimate_tuning);
      } else if (simulate->parsed()) {
        apply_config_file(common.config_path, simulate_args.tuning,
                          simulate_tuning);
      } else if (bench->parsed()) {
        apply_config_file(common.config_path, bench_args.tuning,
                          bench_tuning);
      }
    }
    if (estimate->parsed()) {
      return run_estimate(estimate_args);
    }
    if (transform->parsed()) {
      return run_transform(transform_args);
    }
    if (simulate->parsed()) {
      return run_simulate(simulate_args);
    }
    if (bench->parsed()) {
      return run_bench(bench_args);
    }
    if (warmup->parsed()) {
      return run_demo_warmup(warmup_args);
    }
    return exit_config;
  } catch (const wunt::config_error& err) {
    return dispatch_error(common, "config", err.what(), exit_config);
  } catch (const wunt::schema_error& err) {
    return dispatch_error(common, "schema", err.what(), exit_schema);
  } catch (const wunt::overlap_error& err) {
    return dispatch_error(common, "overlap", err.what(), exit_numeric);
  } catch (const wunt::numeric_error& err) {
    return dispatch_error(common, "numeric", err.what(), exit_numeric);
  } catch (const wunt::io_error& err) {
    return dispatch_error(common, "io", err.what(), exit_io);
  } catch (const std::exception& err) {
    return dispatch_error(common, "internal", err.what(), exit_numeric);
  }
}
