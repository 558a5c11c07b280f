#include "metricforge/eval.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <random>
#include <thread>

#include "json.hpp"
#include "metricforge/error.hpp"
#include "metricforge/linalg.hpp"
#include "metricforge/ncml.hpp"
#include "metricforge/pcml.hpp"

namespace metricforge {

Algorithm parse_algorithm(const std::string& name) {
  if (name == "pcml") return Algorithm::kPcml;
  if (name == "ncml") return Algorithm::kNcml;
  if (name == "euclidean") return Algorithm::kEuclidean;
  throw ArgumentError("unknown algorithm '" + name + "' (expected pcml, ncml or euclidean)");
}

std::string algorithm_name(Algorithm algo) {
  switch (algo) {
    case Algorithm::kPcml: return "pcml";
    case Algorithm::kNcml: return "ncml";
    case Algorithm::kEuclidean: return "euclidean";
  }
  return "?";
}

void validate(const TrainConfig& c) {
  if (!(c.C > 0) || !std::isfinite(c.C)) throw ArgumentError("C must be > 0");
  if (!(c.eps > 0 && c.eps < 1)) throw ArgumentError("eps must lie in (0, 1)");
  if (c.max_iter < 1) throw ArgumentError("max_iter must be >= 1");
  if (!(c.qp_tol > 0)) throw ArgumentError("qp_tol must be > 0");
  if (c.k < 1) throw ArgumentError("k must be >= 1");
}

TrainOutcome train_metric(const Dataset& data, const TrainConfig& config, const ProgressSink& sink) {
  validate(config);
  if (config.algo == Algorithm::kEuclidean) {
    return {MetricModel::euclidean(data.dim()), {}, true, 0, {}};
  }
  const PairSet pairs = build_constraints(data, config.k);
  if (config.algo == Algorithm::kPcml) {
    PcmlConfig pc;
    pc.C = config.C;
    pc.eps = config.eps;
    pc.max_iter = config.max_iter;
    pc.qp_tol = config.qp_tol;
    pc.dense_cap = config.dense_cap;
    auto r = train_pcml(pairs, pc, sink);
    return {std::move(r.model), std::move(r.trace), r.converged, pairs.size(), pairs.warnings};
  }
  NcmlConfig nc;
  nc.C = config.C;
  nc.eps = config.eps;
  nc.max_iter = config.max_iter;
  nc.qp_tol = config.qp_tol;
  nc.seed = config.seed;
  nc.dense_cap = config.dense_cap;
  auto r = train_ncml(pairs, nc, sink);
  return {std::move(r.model), std::move(r.trace), r.converged, pairs.size(), pairs.warnings};
}

std::vector<std::size_t> stratified_folds(std::span<const int> labels, std::size_t folds, std::uint64_t seed) {
  if (folds < 2) throw ArgumentError("folds must be >= 2");
  if (labels.size() < folds) {
    throw ArgumentError("need at least as many samples as folds (" + std::to_string(labels.size()) + " < " +
                        std::to_string(folds) + ")");
  }
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  for (const auto& [label, members] : by_class) {
    if (members.size() < 2) {
      throw ArgumentError("stratification: class " + std::to_string(label) + " has " +
                          std::to_string(members.size()) + " sample(s); its fold would leave training without it");
    }
  }
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> fold(labels.size());
  std::size_t next = 0;
  for (auto& [label, members] : by_class) {
    std::shuffle(members.begin(), members.end(), rng);
    for (std::size_t i : members) {
      fold[i] = next;
      next = (next + 1) % folds;
    }
  }
  return fold;
}

std::size_t count_1nn_errors(const MetricModel& model, const Dataset& train, const Dataset& test) {
  std::size_t errors = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    if (predict_1nn(model, train, test.row(i)) != test.label(i)) ++errors;
  }
  return errors;
}

namespace {

CvFold run_fold(const Dataset& data, const std::vector<std::size_t>& assignment, std::size_t repeat,
                std::size_t fold, const TrainConfig& config, const CvOptions& options) {
  std::vector<std::size_t> tr, te;
  for (std::size_t i = 0; i < assignment.size(); ++i) (assignment[i] == fold ? te : tr).push_back(i);
  Dataset train = data.subset(tr);
  Dataset test = data.subset(te);
  if (options.pca_dim) {
    auto pca = pca_fit(train, *options.pca_dim);
    train = pca.apply(train);
    test = pca.apply(test);
  }
  const auto start = std::chrono::steady_clock::now();
  auto outcome = train_metric(train, config);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  CvFold f;
  f.repeat = repeat;
  f.fold = fold;
  f.n_train = train.size();
  f.n_test = test.size();
  f.n_errors = count_1nn_errors(outcome.model, train, test);
  f.error = f.n_test ? static_cast<double>(f.n_errors) / static_cast<double>(f.n_test) : 0.0;
  f.train_seconds = secs;
  f.iterations = outcome.model.meta().iterations;
  f.converged = outcome.converged;
  return f;
}

}  // namespace

CvReport kfold_cv(const Dataset& data, const TrainConfig& config, const CvOptions& options) {
  validate(config);
  if (options.repeats < 1) throw ArgumentError("repeats must be >= 1");
  if (options.pca_dim && (*options.pca_dim < 1 || *options.pca_dim > data.dim())) {
    throw ArgumentError("pca dimension must lie in [1, " + std::to_string(data.dim()) + "]");
  }
  std::vector<std::vector<std::size_t>> assignments;
  for (std::size_t r = 0; r < options.repeats; ++r) {
    assignments.push_back(stratified_folds(data.labels(), options.folds, options.seed + r));
  }

  const std::size_t n_tasks = options.repeats * options.folds;
  std::vector<std::optional<CvFold>> results(n_tasks);
  std::vector<std::exception_ptr> failures(n_tasks);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t; (t = next.fetch_add(1)) < n_tasks;) {
      const std::size_t r = t / options.folds, f = t % options.folds;
      try {
        results[t] = run_fold(data, assignments[r], r, f, config, options);
      } catch (...) {
        failures[t] = std::current_exception();
      }
    }
  };
  const std::size_t jobs = std::clamp<std::size_t>(options.jobs, 1, n_tasks);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : failures) {
    if (e) std::rethrow_exception(e);
  }

  CvReport report;
  for (auto& r : results) {
    report.folds.push_back(*r);
    report.fold_errors.push_back(r->error);
    report.total_train_seconds += r->train_seconds;
  }
  const double n = static_cast<double>(n_tasks);
  report.mean_error = std::accumulate(report.fold_errors.begin(), report.fold_errors.end(), 0.0) / n;
  double ss = 0.0;
  for (double e : report.fold_errors) ss += (e - report.mean_error) * (e - report.mean_error);
  report.std_error = n_tasks > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  return report;
}

RocReport roc_from_distances(std::span<const double> distances, const std::vector<bool>& matched,
                             std::size_t n_thresholds) {
  if (distances.size() != matched.size()) throw ArgumentError("roc: distances/labels length mismatch");
  if (n_thresholds < 1) throw ArgumentError("roc: n_thresholds must be >= 1");
  RocReport rep;
  for (bool m : matched) (m ? rep.n_matched : rep.n_mismatched)++;
  if (rep.n_matched == 0 || rep.n_mismatched == 0) {
    throw ArgumentError("roc: pair set must contain both matched and mismatched pairs");
  }
  for (double d : distances) {
    if (std::isnan(d)) throw NumericalError("roc: NaN distance");
  }

  // sorted by distance; counts of matched / mismatched with distance <= t
  std::vector<std::size_t> order(distances.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return distances[a] < distances[b]; });
  std::vector<double> sorted(order.size());
  std::vector<std::size_t> cum_match(order.size() + 1, 0), cum_mis(order.size() + 1, 0);
  for (std::size_t i = 0; i < order.size(); ++i) {
    sorted[i] = distances[order[i]];
    cum_match[i + 1] = cum_match[i] + (matched[order[i]] ? 1 : 0);
    cum_mis[i + 1] = cum_mis[i] + (matched[order[i]] ? 0 : 1);
  }
  auto counts_at = [&](double t) {
    const std::size_t k = static_cast<std::size_t>(std::upper_bound(sorted.begin(), sorted.end(), t) - sorted.begin());
    return std::pair{cum_match[k], cum_mis[k]};
  };
  const double nm = static_cast<double>(rep.n_matched), nx = static_cast<double>(rep.n_mismatched);
  const double total = nm + nx;
  auto accuracy = [&](std::pair<std::size_t, std::size_t> c) {
    return (static_cast<double>(c.first) + (nx - static_cast<double>(c.second))) / total;
  };

  constexpr double inf = std::numeric_limits<double>::infinity();
  const double lo = sorted.front(), hi = sorted.back();
  rep.thresholds.push_back(-inf);
  if (n_thresholds == 1 || lo == hi) {
    rep.thresholds.push_back(lo);
  } else {
    for (std::size_t i = 0; i < n_thresholds; ++i) {
      const double t = i + 1 == n_thresholds ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n_thresholds - 1);
      rep.thresholds.push_back(t);
    }
  }
  rep.thresholds.push_back(inf);

  rep.best_accuracy = -1.0;
  auto consider = [&](double t) {
    const double acc = accuracy(counts_at(t));
    if (acc > rep.best_accuracy || (acc == rep.best_accuracy && t < rep.best_threshold)) {
      rep.best_accuracy = acc;
      rep.best_threshold = t;
    }
  };
  for (double t : rep.thresholds) {
    const auto c = counts_at(t);
    rep.tpr.push_back(static_cast<double>(c.first) / nm);
    rep.fpr.push_back(static_cast<double>(c.second) / nx);
    consider(t);
  }
  for (double t : sorted) consider(t);
  return rep;
}

RocReport verify_pairs(const MetricModel& model, const Dataset& features, std::span<const LabeledPair> pairs,
                       std::size_t n_thresholds) {
  if (features.dim() != model.dim()) {
    throw ArgumentError("verify: feature dimension " + std::to_string(features.dim()) + " != model dimension " +
                        std::to_string(model.dim()));
  }
  std::vector<double> dist;
  std::vector<bool> matched;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto& lp = pairs[p];
    if (lp.a >= features.size() || lp.b >= features.size()) {
      throw ArgumentError("verify: pair " + std::to_string(p) + " references a row outside the feature file");
    }
    dist.push_back(model.distance2(features.row(lp.a), features.row(lp.b)));
    matched.push_back(lp.matched);
  }
  return roc_from_distances(dist, matched, n_thresholds);
}

std::vector<double> PcaTransform::apply(std::span<const double> x) const {
  if (x.size() != dim) throw ArgumentError("pca: input dimension mismatch");
  std::vector<double> out(rank, 0.0);
  for (std::size_t i = 0; i < dim; ++i) {
    const double c = x[i] - mean[i];
    for (std::size_t j = 0; j < rank; ++j) out[j] += c * projection[i * rank + j];
  }
  return out;
}

Dataset PcaTransform::apply(const Dataset& data) const {
  std::vector<double> feats;
  feats.reserve(data.size() * rank);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto y = apply(data.row(i));
    feats.insert(feats.end(), y.begin(), y.end());
  }
  return Dataset(rank, std::move(feats), data.labels());
}

PcaTransform pca_fit(const Dataset& data, std::size_t r) {
  const std::size_t n = data.size(), d = data.dim();
  if (r < 1 || r > std::min(n, d)) {
    throw ArgumentError("pca: r = " + std::to_string(r) + " outside [1, " + std::to_string(std::min(n, d)) + "]");
  }
  PcaTransform t;
  t.dim = d;
  t.rank = r;
  t.mean.assign(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) t.mean[j] += data.row(i)[j];
  }
  for (double& m : t.mean) m /= static_cast<double>(n);
  SymMatrix cov(d);
  std::vector<double> c(d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) c[j] = data.row(i)[j] - t.mean[j];
    cov.add_outer(c, 1.0);
  }
  cov.scale(1.0 / static_cast<double>(n > 1 ? n - 1 : 1));
  const auto eig = sym_eig(cov);
  t.projection.resize(d * r);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < r; ++j) t.projection[i * r + j] = eig.vec(i, j);
  }
  t.variances.assign(eig.values.begin(), eig.values.begin() + static_cast<std::ptrdiff_t>(r));
  return t;
}

std::pair<PcaTransform, Dataset> pca_fit_transform(const Dataset& data, std::size_t r) {
  auto t = pca_fit(data, r);
  auto out = t.apply(data);
  return {std::move(t), std::move(out)};
}

namespace {

std::string fmt17(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

std::string format_cv_folds_csv(const CvReport& report) {
  std::string out = "repeat,fold,n_train,n_test,n_errors,error,iterations,converged,train_seconds\n";
  for (const auto& f : report.folds) {
    out += std::to_string(f.repeat) + "," + std::to_string(f.fold) + "," + std::to_string(f.n_train) + "," +
           std::to_string(f.n_test) + "," + std::to_string(f.n_errors) + "," + fmt17(f.error) + "," +
           std::to_string(f.iterations) + "," + (f.converged ? "1" : "0") + "," + fmt17(f.train_seconds) + "\n";
  }
  return out;
}

std::string format_cv_summary_json(const CvReport& report, const TrainConfig& config, const CvOptions& options,
                                   const Dataset& data) {
  nlohmann::ordered_json j;
  j["algorithm"] = algorithm_name(config.algo);
  j["C"] = config.C;
  j["eps"] = config.eps;
  j["k"] = config.k;
  j["max_iter"] = config.max_iter;
  j["folds"] = options.folds;
  j["repeats"] = options.repeats;
  j["seed"] = options.seed;
  j["pca"] = options.pca_dim ? nlohmann::ordered_json(*options.pca_dim) : nlohmann::ordered_json(nullptr);
  j["n_samples"] = data.size();
  j["dim"] = data.dim();
  j["fold_errors"] = report.fold_errors;
  j["mean_error"] = report.mean_error;
  j["std_error"] = report.std_error;
  std::size_t converged = 0;
  for (const auto& f : report.folds) converged += f.converged ? 1 : 0;
  j["converged_folds"] = converged;
  return j.dump(2) + "\n";
}

std::string format_cv_timing_json(const CvReport& report) {
  nlohmann::ordered_json j;
  std::vector<double> secs;
  for (const auto& f : report.folds) secs.push_back(f.train_seconds);
  j["total_train_seconds"] = report.total_train_seconds;
  j["fold_train_seconds"] = secs;
  return j.dump(2) + "\n";
}

std::string format_roc_csv(const RocReport& report) {
  std::string out = "threshold,tpr,fpr\n";
  for (std::size_t i = 0; i < report.thresholds.size(); ++i) {
    out += fmt17(report.thresholds[i]) + "," + fmt17(report.tpr[i]) + "," + fmt17(report.fpr[i]) + "\n";
  }
  return out;
}

std::string format_verify_summary_json(const RocReport& report) {
  nlohmann::ordered_json j;
  j["n_matched"] = report.n_matched;
  j["n_mismatched"] = report.n_mismatched;
  j["n_thresholds"] = report.thresholds.size();
  j["best_accuracy"] = report.best_accuracy;
  if (std::isinf(report.best_threshold)) {
    j["best_threshold"] = report.best_threshold > 0 ? "inf" : "-inf";
  } else {
    j["best_threshold"] = report.best_threshold;
  }
  return j.dump(2) + "\n";
}

}  // namespace metricforge
