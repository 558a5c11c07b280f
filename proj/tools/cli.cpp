#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <ostream>

#include "CLI11.hpp"
#include "metricforge/dataset.hpp"
#include "metricforge/error.hpp"
#include "metricforge/eval.hpp"
#include "metricforge/linalg.hpp"
#include "metricforge/model.hpp"
#include "metricforge/synthetic.hpp"

namespace metricforge::cli {

namespace fs = std::filesystem;

namespace {

struct Options {
  std::string data;
  std::string format = "csv";
  std::string algo = "pcml";
  double C = 0.5;
  double eps = 0.01;
  std::size_t k = 2;
  int max_iter = 100;
  std::size_t folds = 10;
  std::size_t repeats = 1;
  std::uint64_t seed = 1;
  std::size_t jobs = 1;
  std::string out_dir = ".";
  std::string model;
  std::string features;
  std::string pairs;
  std::size_t thresholds = 200;
  std::string kind = "two_gaussians";
  std::string out;
};

class NotConverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

DataFormat data_format(const Options& o) { return o.format == "libsvm" ? DataFormat::kLibsvm : DataFormat::kCsv; }

TrainConfig train_config(const Options& o) {
  TrainConfig c;
  c.algo = parse_algorithm(o.algo);
  c.C = o.C;
  c.eps = o.eps;
  c.k = o.k;
  c.max_iter = o.max_iter;
  c.seed = o.seed;
  validate(c);
  return c;
}

fs::path prepare_out_dir(const Options& o) {
  fs::path dir(o.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

void add_train_options(CLI::App* sub, Options& o) {
  sub->add_option("--data", o.data, "dataset file (label in the last CSV column)")->required();
  sub->add_option("--format", o.format, "dataset format")->check(CLI::IsMember({"csv", "libsvm"}));
  sub->add_option("--algo", o.algo, "metric learner")->check(CLI::IsMember({"pcml", "ncml", "euclidean"}));
  sub->add_option("--C", o.C, "slack penalty");
  sub->add_option("--eps", o.eps, "stop when gap(t) < eps * gap(1)");
  sub->add_option("--k", o.k, "neighbors per sample for pair construction");
  sub->add_option("--max-iter", o.max_iter, "outer iteration cap");
  sub->add_option("--seed", o.seed, "seed for folds and NCML initialization");
  sub->add_option("--out-dir", o.out_dir, "output directory");
}

int cmd_train(const Options& o, std::ostream& out, std::ostream& err) {
  const auto config = train_config(o);
  const Dataset data = read_dataset(o.data, data_format(o));
  auto outcome = train_metric(data, config);
  for (const auto& w : outcome.warnings) err << "warning: " << w << "\n";
  const auto dir = prepare_out_dir(o);
  save_model(outcome.model, dir / "model.txt");
  write_text_file_atomic(dir / "trace.csv", format_trace_csv(outcome.trace));
  const auto& meta = outcome.model.meta();
  out << "algorithm: " << meta.algorithm << "\n"
      << "samples: " << data.size() << "  dim: " << data.dim() << "  pairs: " << outcome.n_pairs << "\n"
      << "iterations: " << meta.iterations << "  converged: " << (meta.converged ? "yes" : "no")
      << "  final gap: " << fmt(meta.final_gap) << "\n"
      << "wrote " << (dir / "model.txt").string() << ", " << (dir / "trace.csv").string() << "\n";
  if (!outcome.converged) throw NotConverged("training hit max-iter " + std::to_string(config.max_iter));
  return kOk;
}

int cmd_cv(const Options& o, std::optional<std::size_t> pca, std::ostream& out, std::ostream& err) {
  const auto config = train_config(o);
  CvOptions cv;
  cv.folds = o.folds;
  cv.repeats = o.repeats;
  cv.seed = o.seed;
  cv.pca_dim = pca;
  cv.jobs = o.jobs;
  const Dataset data = read_dataset(o.data, data_format(o));
  const auto report = kfold_cv(data, config, cv);
  const auto dir = prepare_out_dir(o);
  write_text_file_atomic(dir / "cv_folds.csv", format_cv_folds_csv(report));
  write_text_file_atomic(dir / "cv_summary.json", format_cv_summary_json(report, config, cv, data));
  write_text_file_atomic(dir / "cv_timing.json", format_cv_timing_json(report));
  std::size_t unconverged = 0;
  for (const auto& f : report.folds) unconverged += f.converged ? 0 : 1;
  out << "algorithm: " << algorithm_name(config.algo) << "  folds: " << cv.folds << "  repeats: " << cv.repeats
      << "\n"
      << "mean error: " << fmt(report.mean_error) << "  std: " << fmt(report.std_error) << "\n"
      << "total train seconds: " << fmt(report.total_train_seconds) << "\n";
  if (unconverged) {
    err << "warning: " << unconverged << " fold(s) hit max-iter\n";
    throw NotConverged(std::to_string(unconverged) + " fold(s) did not converge");
  }
  return kOk;
}

int cmd_verify(const Options& o, std::ostream& out) {
  const MetricModel model = load_model(o.model);
  const Dataset features = read_dataset(o.features, data_format(o));
  std::vector<LabeledPair> pairs;
  try {
    pairs = parse_pair_file(read_text_file(o.pairs));
  } catch (const ParseError& e) {
    throw ParseError(o.pairs + ": " + e.what());
  }
  const auto roc = verify_pairs(model, features, pairs, o.thresholds);
  const auto dir = prepare_out_dir(o);
  write_text_file_atomic(dir / "roc.csv", format_roc_csv(roc));
  write_text_file_atomic(dir / "verify_summary.json", format_verify_summary_json(roc));
  out << "pairs: " << pairs.size() << " (" << roc.n_matched << " matched, " << roc.n_mismatched << " mismatched)\n"
      << "best accuracy: " << fmt(roc.best_accuracy) << " at threshold " << fmt(roc.best_threshold) << "\n";
  return kOk;
}

int cmd_inspect(const Options& o, std::ostream& out) {
  RawModel raw;
  try {
    raw = parse_model(read_text_file(o.model));
  } catch (const ParseError& e) {
    throw ParseError(o.model + ": " + e.what());
  }
  const auto eig = sym_eig(raw.m);
  const double lo = eig.values.back(), hi = eig.values.front();
  const double tol = 1e-8 * std::max(1.0, raw.m.max_abs());
  const bool psd = lo >= -tol;
  out << "algorithm: " << raw.meta.algorithm << "\n"
      << "dim: " << raw.m.dim() << "\n"
      << "C: " << fmt(raw.meta.C) << "  eps: " << fmt(raw.meta.eps) << "\n"
      << "iterations: " << raw.meta.iterations << "  converged: " << (raw.meta.converged ? "yes" : "no")
      << "  final gap: " << fmt(raw.meta.final_gap) << "\n"
      << "min eigenvalue: " << fmt(lo) << "\n"
      << "max eigenvalue: " << fmt(hi) << "\n"
      << "trace: " << fmt(raw.m.trace()) << "\n"
      << "PSD: " << (psd ? "yes" : "NO") << "\n";
  return psd ? kOk : kNumerical;
}

int cmd_synth(const Options& o, std::ostream& out) {
  Dataset d;
  if (o.kind == "two_gaussians") {
    d = two_gaussians(o.seed);
  } else if (o.kind == "anisotropic") {
    d = anisotropic(o.seed);
  } else {
    d = two_blobs(o.seed);
  }
  write_text_file_atomic(o.out, format_csv_dataset(d));
  out << "wrote " << d.size() << " samples of dim " << d.dim() << " to " << o.out << "\n";
  return kOk;
}

// Turns `--config FILE` into ordinary flags placed ahead of the user's own,
// so explicit flags win. Keys may sit at top level or under [subcommand].
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  if (args.empty()) return args;
  std::vector<std::string> rest;
  std::optional<std::string> path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw CLI::ArgumentMismatch("--config needs a file");
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  std::vector<std::string> expanded{args[0]};
  if (path) {
    if (!fs::exists(*path)) throw IoError("config file not found: " + *path);
    for (const auto& item : CLI::ConfigBase().from_file(*path)) {
      if (item.name == "++" || item.name == "--") continue;  // section markers
      if (!item.parents.empty() && !(item.parents.size() == 1 && item.parents[0] == args[0])) continue;
      expanded.push_back("--" + item.name);
      for (const auto& v : item.inputs) expanded.push_back(v);
    }
  }
  expanded.insert(expanded.end(), rest.begin(), rest.end());
  return expanded;
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"metricforge: Mahalanobis metric learning by iterated SVM (PCML, NCML)", "metricforge"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  Options o;
  std::size_t pca = 0;
  std::string config_path;  // consumed by expand_config; listed for --help

  auto* train = app.add_subcommand("train", "learn a metric; writes model.txt and trace.csv");
  add_train_options(train, o);
  train->add_option("--config", config_path, "key=value file; flags override it");

  auto* cv = app.add_subcommand("cv", "k-fold 1-NN cross-validation");
  add_train_options(cv, o);
  cv->add_option("--folds", o.folds, "number of folds");
  cv->add_option("--repeats", o.repeats, "repeat with seeds seed, seed+1, ...");
  auto* pca_opt = cv->add_option("--pca", pca, "PCA dimension, fit on each training split");
  cv->add_option("--jobs", o.jobs, "folds trained concurrently");
  cv->add_option("--config", config_path, "key=value file; flags override it");

  auto* verify = app.add_subcommand("verify", "pairwise verification ROC");
  verify->add_option("--model", o.model, "model file")->required();
  verify->add_option("--features", o.features, "feature file (label column present, ignored)")->required();
  verify->add_option("--pairs", o.pairs, "pair file: idx_a,idx_b,matched")->required();
  verify->add_option("--format", o.format, "feature file format")->check(CLI::IsMember({"csv", "libsvm"}));
  verify->add_option("--thresholds", o.thresholds, "grid size between min and max distance");
  verify->add_option("--out-dir", o.out_dir, "output directory");
  verify->add_option("--config", config_path, "key=value file; flags override it");

  auto* inspect = app.add_subcommand("inspect", "print model summary and PSD verdict");
  inspect->add_option("model", o.model, "model file")->required();

  auto* synth = app.add_subcommand("synth", "write a bundled synthetic dataset as CSV");
  synth->add_option("--kind", o.kind)->check(CLI::IsMember({"two_gaussians", "anisotropic", "two_blobs"}));
  synth->add_option("--seed", o.seed);
  synth->add_option("--out", o.out, "output CSV")->required();

  try {
    auto args = expand_config(raw_args);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
      return kOk;
    }
    err << "error: " << e.what() << "\n" << "run with --help for usage\n";
    return kUsage;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kIo;
  } catch (const CLI::Error& e) {
    err << "error: config: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (*train) return cmd_train(o, out, err);
    if (*cv) return cmd_cv(o, pca_opt->count() ? std::optional<std::size_t>(pca) : std::nullopt, out, err);
    if (*verify) return cmd_verify(o, out);
    if (*inspect) return cmd_inspect(o, out);
    if (*synth) return cmd_synth(o, out);
  } catch (const NotConverged& e) {
    err << "not converged: " << e.what() << "\n";
    return kNotConverged;
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return kIo;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << "\n";
    return kIo;
  } catch (const IntegrityError& e) {
    err << "integrity error: " << e.what() << "\n";
    return kNumerical;
  } catch (const Error& e) {
    err << "numerical error: " << e.what() << "\n";
    return kNumerical;
  }
  return kUsage;
}

}  // namespace metricforge::cli
