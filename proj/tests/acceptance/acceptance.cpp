// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
//
// Each criterion carries its own wall-clock budget; exceeding it is a failure
// just like a wrong answer.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <driverid/driverid.hpp>

#include "cli/cli.hpp"
#include "support/corpus.hpp"
#include "support/gen.hpp"
#include "support/oracles.hpp"

using namespace driverid;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double rel_err(double got, double want) {
  if (got == want) return 0.0;
  return std::abs(got - want) / std::abs(want);
}

std::string fmt(double v, int precision = 4) {
  std::ostringstream os;
  os << std::setprecision(precision) << v;
  return os.str();
}

int failures = 0;

void criterion(const std::string& name, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (elapsed > budget_s) {
    o.pass = false;
    o.detail += "; over budget";
  }
  if (!o.pass) ++failures;
  std::cout << (o.pass ? "PASS " : "FAIL ") << name << " (" << o.detail << "; " << fmt(elapsed, 3)
            << " s of " << budget_s << " s)" << std::endl;
}

// ---------------------------------------------------------------- criteria

Outcome feature_dimension() {
  const FeatureConfig all;
  const auto schema = make_schema(all);
  const bool ok = all.dimension() == 633 && schema.size() == 633 &&
                  FeatureConfig::only({FeatureFamily::histogram}).dimension() == 600 &&
                  FeatureConfig::only({FeatureFamily::correlation}).dimension() == 15;
  return {ok, "dimension " + std::to_string(schema.size())};
}

Outcome oracle_equivalence() {
  constexpr std::size_t kCases = 120;
  std::size_t hist_bad = 0, moment_bad = 0, corr_bad = 0, knn_bad = 0;
  double worst_moment = 0.0, worst_corr = 0.0;
  gen::for_all(9001, kCases, [&](gen::Gen& g, std::size_t i) {
    const std::size_t n = i % 2 ? 1200 : g.index(2, 1800);
    const auto xs = i % 3 == 0 ? g.lumpy(n) : g.normals(n, g.uniform(-5, 5), g.uniform(0.01, 5));
    const int bins = i % 2 ? 100 : static_cast<int>(g.index(1, 120));
    if (trimmed_histogram(xs, bins, 0.95) != oracle::histogram(xs, bins, 0.95)) ++hist_bad;

    const Window w = gen::window(g, g.index(3, 1800));
    const auto m = window_mean(w);
    const auto v = window_variance(w);
    double moment = 0.0, corr = 0.0;
    for (std::size_t c = 0; c < kChannelCount; ++c) {
      moment = std::max({moment, rel_err(m[c], oracle::mean(w.channels[c])),
                         rel_err(v[c], oracle::variance(w.channels[c]))});
    }
    const auto got = pairwise_correlation(w);
    const auto want = oracle::correlations(w);
    for (std::size_t k = 0; k < kPairCount; ++k) corr = std::max(corr, rel_err(got[k], want[k]));
    if (moment > 1e-12) ++moment_bad;
    if (corr > 1e-12) ++corr_bad;
    worst_moment = std::max(worst_moment, moment);
    worst_corr = std::max(worst_corr, corr);

    const auto d = gen::dataset(g, 200, g.index(1, 8), g.index(2, 6));
    const std::size_t k = g.index(1, 15);
    const auto model = knn_train(d, k);
    for (int q = 0; q < 20; ++q) {
      std::vector<double> x(d.cols());
      for (auto& e : x) e = g.normal(0.0, 1.2);
      const auto& label = knn_predict(model, x);
      if (label != d.class_list[oracle::knn(d.features, d.labels, d.class_list.size(), k, x)]) {
        ++knn_bad;
        break;
      }
    }
  });
  const bool ok = hist_bad + moment_bad + corr_bad + knn_bad == 0;
  return {ok, std::to_string(kCases) + " instances each; mismatches hist/moments/corr/knn = " +
                  std::to_string(hist_bad) + "/" + std::to_string(moment_bad) + "/" +
                  std::to_string(corr_bad) + "/" + std::to_string(knn_bad) + "; worst rel moments " +
                  fmt(worst_moment) + ", corr " + fmt(worst_corr)};
}

Outcome gradient_check() {
  double worst = 0.0;
  constexpr std::size_t kPoints = 20;
  gen::for_all(9002, kPoints, [&](gen::Gen& g, std::size_t i) {
    const std::vector<std::size_t> sizes{2, 3, 2};
    auto net = MlpNetwork::init(sizes, i % 2 ? Activation::relu : Activation::tanh, g.index(0, 1u << 30));
    auto p = net.flatten();
    for (auto& v : p) v = g.normal(0.0, 1.0);
    net.unflatten(p);
    Eigen::MatrixXd x(2, 5);
    for (Eigen::Index c = 0; c < 5; ++c) {
      x(0, c) = g.normal();
      x(1, c) = g.normal();
    }
    const std::vector<std::size_t> y{0, 1, 1, 0, 1};
    std::vector<double> grad;
    net.loss_and_gradient(x, y, grad);
    const auto num = oracle::numeric_gradient(net, x, y, 1e-6);
    for (std::size_t k = 0; k < grad.size(); ++k) {
      const double scale = std::max({std::abs(grad[k]), std::abs(num[k]), 1e-6});
      worst = std::max(worst, std::abs(grad[k] - num[k]) / scale);
    }
  });
  return {worst < 1e-4, std::to_string(kPoints) + " points, max relative error " + fmt(worst)};
}

Outcome stop_exactness() {
  constexpr std::size_t kTrips = 24;
  std::size_t missed = 0, truth_stops = 0, bad_total = 0, bad_identity = 0;
  double worst_total = 0.0;
  gen::for_all(9003, kTrips, [&](gen::Gen& g, std::size_t i) {
    const auto sep = i % 2 ? Separation::easy : Separation::hard;
    DriverProfile p = make_profiles(4, sep, g.index(0, 1u << 30))[i % 4];
    p.stop_frequency = g.uniform(2.0, 8.0);
    p.gap_frequency = g.uniform(0.0, 6.0);
    const auto syn = generate_trip(p, g.uniform(1200.0, 3600.0));
    CleaningConfig cfg;
    cfg.denoise_window = 1;
    const auto c = clean(syn.trip, cfg);
    const double period = syn.trip.period();
    for (const auto& t : syn.truth.stops) {
      if (t.duration() <= cfg.min_stop_seconds) continue;
      ++truth_stops;
      const bool hit = std::any_of(c.stops.begin(), c.stops.end(), [&](const StopInterval& s) {
        return std::abs(s.start_t - t.start_t) <= period && std::abs(s.end_t - t.end_t) <= period;
      });
      if (!hit) ++missed;
    }
    const double diff = std::abs(c.removed_stop_seconds - syn.truth.removable_stop_seconds(cfg.min_stop_seconds));
    worst_total = std::max(worst_total, diff);
    if (diff > 1.0) ++bad_total;
    const double identity = c.input_seconds - (c.clean_seconds() + c.removed_stop_seconds + c.removed_gap_seconds);
    if (std::abs(identity) > period) ++bad_identity;
  });
  const bool ok = missed == 0 && bad_total == 0 && bad_identity == 0 && truth_stops > 0;
  return {ok, std::to_string(kTrips) + " trips, " + std::to_string(truth_stops) + " stops > 6 s, " +
                  std::to_string(missed) + " missed; worst removed-seconds error " + fmt(worst_total) +
                  " s; identity violations " + std::to_string(bad_identity)};
}

Outcome partition_purity() {
  const auto trips = corpus::cleaned(corpus::synthetic(3, 1.0, Separation::easy, 9004));
  std::size_t configs = 0, skipped = 0, overlaps = 0;
  gen::for_all(9005, 60, [&](gen::Gen& g, std::size_t) {
    SegmentationConfig seg;
    seg.window_minutes = g.uniform(0.5, 10.0);
    seg.overlap_fraction = g.uniform(0.0, 0.95);
    seg.train_fraction = g.uniform(0.3, 0.8);
    FeatureSet set;
    try {
      set = featurize(trips, seg, FeatureConfig::only({FeatureFamily::mean}));
    } catch (const DataError&) {
      ++skipped;
      return;
    }
    ++configs;
    for (const auto& tr : set.train) {
      for (const auto& te : set.test) {
        if (tr.driver_id == te.driver_id && tr.start_t < te.end_t && te.start_t < tr.end_t) ++overlaps;
      }
    }
  });
  return {configs >= 50 && overlaps == 0, std::to_string(configs) + " configs (" + std::to_string(skipped) +
                                              " too short), " + std::to_string(overlaps) + " overlaps"};
}

// Shared by the end-to-end and ablation criteria.
struct Benchmark {
  std::vector<CleanTrip> trips;
  SegmentationConfig seg;
  double all_features_mlp = std::nan("");
};

Benchmark& benchmark_corpus() {
  static Benchmark b = [] {
    Benchmark x;
    x.trips = corpus::cleaned(corpus::synthetic(10, 2.0, Separation::easy, 2024));
    x.seg.window_minutes = 15;
    x.seg.overlap_fraction = 0.75;
    return x;
  }();
  return b;
}

double test_accuracy(const FeatureSet& set, ModelKind kind) {
  ModelSpec spec;
  spec.kind = kind;
  const auto model = fit(set, seeded_model(spec, 1));
  return evaluate(model, LabeledDataset::from_vectors(set.test)).accuracy;
}

Outcome end_to_end() {
  auto& b = benchmark_corpus();
  const auto set = featurize(b.trips, b.seg, FeatureConfig{});
  bool ok = set.schema->size() == 633;
  std::string detail = std::to_string(set.train.size()) + " train / " + std::to_string(set.test.size()) +
                       " test windows;";
  for (auto kind : {ModelKind::mlp, ModelKind::knn, ModelKind::dtree, ModelKind::rforest}) {
    const double acc = test_accuracy(set, kind);
    const double need = kind == ModelKind::mlp ? 0.90 : 0.60;
    if (kind == ModelKind::mlp) b.all_features_mlp = acc;
    ok = ok && acc >= need;
    detail += " " + std::string(model_kind_name(kind)) + " " + fmt(acc) + " (>= " + fmt(need) + ")";
  }

  GridSpec grid;
  grid.repetitions = 3;
  PipelineConfig base;
  base.seed = 2024;
  const auto result = run_grid(b.trips, grid, base);
  std::size_t populated = 0, annotated = 0;
  for (const auto& r : result.rows) {
    if (r.ok() && std::isfinite(r.mean_accuracy) && r.accuracies.size() == grid.repetitions) {
      ++populated;
    } else if (!r.note.empty()) {
      ++annotated;
    }
  }
  const auto report = render_report(result.rows, result.complete);
  std::ofstream("acceptance_grid.txt") << report.text;
  std::ofstream("acceptance_grid.csv") << report.csv;
  std::ofstream("acceptance_grid.json") << report.json;
  std::cout << report.text;
  ok = ok && result.complete && result.rows.size() == 16 && populated + annotated == 16;
  detail += "; grid " + std::to_string(populated) + " populated, " + std::to_string(annotated) + " annotated";
  return {ok, detail};
}

Outcome determinism() {
  corpus::TempDir dir("acceptance");
  std::ofstream(dir / "run.ini") << "[segmentation]\nwindow_minutes = 5\noverlap_fraction = 0.5\n";
  std::ostringstream sink;
  auto run = [&](std::vector<std::string> args) {
    const int code = cli::run(args, sink, sink);
    if (code != 0) throw std::runtime_error("driverid " + args[0] + " exited " + std::to_string(code) + ": " + sink.str());
  };
  const std::string config = (dir / "run.ini").string();
  run({"synth", "--drivers", "4", "--hours", "0.75", "--seed", "11", "--config", config, "--out",
       (dir / "data").string()});
  const std::string manifest = (dir / "data" / "manifest.csv").string();
  for (const char* out : {"a", "b"}) {
    for (const char* cmd : {"train", "evaluate"}) {
      run({cmd, "--config", config, "--manifest", manifest, "--seed", "7", "--out", (dir / out).string()});
    }
  }
  std::size_t same = 0;
  std::string differing;
  for (const char* f : {"model.json", "train_report.json", "evaluation.csv", "evaluation.json"}) {
    if (corpus::slurp(dir / "a" / f) == corpus::slurp(dir / "b" / f)) {
      ++same;
    } else {
      differing += std::string(" ") + f;
    }
  }
  return {same == 4, std::to_string(same) + "/4 files byte-identical" + (differing.empty() ? "" : ";" + differing)};
}

Outcome ablation() {
  auto& b = benchmark_corpus();
  if (std::isnan(b.all_features_mlp)) {
    b.all_features_mlp = test_accuracy(featurize(b.trips, b.seg, FeatureConfig{}), ModelKind::mlp);
  }
  bool ok = true;
  std::string detail = "all " + fmt(b.all_features_mlp) + ";";
  for (auto f : {FeatureFamily::histogram, FeatureFamily::mean, FeatureFamily::variance,
                 FeatureFamily::difference, FeatureFamily::correlation}) {
    const double acc = test_accuracy(featurize(b.trips, b.seg, FeatureConfig::only({f})), ModelKind::mlp);
    ok = ok && b.all_features_mlp >= acc - 0.05;
    detail += " " + std::string(family_name(f)) + " " + fmt(acc);
  }
  return {ok, detail};
}

}  // namespace

int main() {
  criterion("feature dimension is 633", 1.0, feature_dimension);
  criterion("histogram, moments, correlation and knn match brute-force oracles", 10.0, oracle_equivalence);
  criterion("MLP analytic gradient matches finite differences", 5.0, gradient_check);
  criterion("stop removal matches synthetic truth", 30.0, stop_exactness);
  criterion("train and test windows never overlap", 10.0, partition_purity);
  criterion("end-to-end synthetic benchmark and grid report", 300.0, end_to_end);
  criterion("train and evaluate are byte-for-byte reproducible", 60.0, determinism);
  criterion("all features within 0.05 of every single family", 300.0, ablation);
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << '\n';
  return failures == 0 ? 0 : 1;
}
