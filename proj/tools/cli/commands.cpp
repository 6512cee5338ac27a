#include <atomic>
#include <csignal>
#include <cmath>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "cli/cli.hpp"
#include "cli/output.hpp"
#include "json.hpp"

namespace driverid::cli {

namespace {

using json = nlohmann::ordered_json;

std::atomic<bool> g_interrupted{false};

extern "C" void on_sigint(int) { g_interrupted.store(true); }

struct CommonOptions {
  std::string config;
  std::string manifest;
  std::string out;
  std::optional<std::uint64_t> seed;
};

struct Context {
  RunConfig run;
  std::filesystem::path out_dir;
  std::ostream& out;
  std::ostream& err;
};

Context make_context(const CommonOptions& o, std::ostream& out, std::ostream& err) {
  RunConfig rc = o.config.empty() ? RunConfig{} : read_run_config(o.config);
  if (o.seed) rc.pipeline.seed = *o.seed;
  std::filesystem::path dir;
  if (!o.out.empty()) {
    dir = o.out;
  } else if (rc.out_dir) {
    dir = *rc.out_dir;
  } else {
    throw ConfigError("no output directory: pass --out or set [run] out");
  }
  rc.pipeline.validate();
  return Context{std::move(rc), std::move(dir), out, err};
}

Manifest require_manifest(const CommonOptions& o) {
  if (o.manifest.empty()) throw ConfigError("--manifest is required");
  return read_manifest(o.manifest);
}

std::vector<Trip> load_trips(const Manifest& m, std::ostream& err) {
  std::vector<Trip> trips;
  trips.reserve(m.entries.size());
  for (const auto& e : m.entries) {
    auto parsed = read_log_file(e.path, e.driver_id, e.rate_hz);
    if (parsed.rejected_rows > 0) {
      err << e.path.filename().string() << ": rejected " << parsed.rejected_rows << " rows\n";
    }
    trips.push_back(std::move(parsed.trip));
  }
  return trips;
}

std::vector<CleanTrip> clean_trips(const Manifest& m, const std::vector<Trip>& trips,
                                   const CleaningConfig& cfg) {
  std::vector<CleanTrip> out;
  out.reserve(trips.size());
  for (std::size_t i = 0; i < trips.size(); ++i) {
    try {
      out.push_back(clean(trips[i], cfg));
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw DataError(m.entries[i].path.filename().string() + " (driver " + trips[i].driver_id +
                      "): " + e.what());
    }
  }
  return out;
}

std::string to_string_with(auto&& writer) {
  std::ostringstream s;
  writer(s);
  return s.str();
}

std::uint64_t model_seed(std::uint64_t master) { return derive_seed(master, "model"); }

json seeds_json(std::uint64_t master) {
  const auto ms = model_seed(master);
  const auto spec = seeded_model(ModelSpec{}, ms);
  return {{"master", master}, {"model", ms}, {"forest", spec.forest.seed}, {"mlp", spec.mlp.seed}};
}

// ---------------------------------------------------------------------------

struct SynthOptions {
  std::size_t drivers = 10;
  double hours = 1.5;
  std::string separation = "easy";
  double rate = kDefaultRateHz;
};

int cmd_synth(const CommonOptions& o, const SynthOptions& s, std::ostream& out,
              std::ostream& err) {
  Context ctx = make_context(o, out, err);
  if (s.drivers < 2) throw ConfigError("--drivers must be at least 2");
  if (!(s.hours > 0.0) || !(s.rate > 0.0)) throw ConfigError("--hours and --rate must be positive");
  const double minutes = s.hours * 60.0;
  if (minutes < ctx.run.pipeline.segmentation.window_minutes) {
    throw ConfigError("--hours is shorter than one " +
                      std::to_string(ctx.run.pipeline.segmentation.window_minutes) +
                      "-minute window");
  }
  Separation sep;
  if (s.separation == "easy") {
    sep = Separation::easy;
  } else if (s.separation == "hard") {
    sep = Separation::hard;
  } else {
    throw ConfigError("--separation must be easy or hard");
  }

  const auto profiles = make_profiles(s.drivers, sep, ctx.run.pipeline.seed);
  StagedOutput staged(ctx.out_dir);
  Manifest manifest;
  manifest.name = "synthetic";
  for (const auto& p : profiles) {
    const auto st = generate_trip(p, s.hours * 3600.0, s.rate);
    const std::string log = p.driver_id + ".csv";
    staged.add(log, to_string_with([&](std::ostream& os) { write_log(os, st.trip); }));
    staged.add(p.driver_id + ".truth.json",
               to_string_with([&](std::ostream& os) { write_truth_json(os, st.truth); }));
    manifest.entries.push_back({ctx.out_dir / log, p.driver_id, s.rate});
  }
  staged.add("manifest.csv", to_string_with([&](std::ostream& os) {
               write_manifest(os, manifest, ctx.out_dir);
             }));
  staged.commit();
  out << "wrote " << profiles.size() << " synthetic trips to " << ctx.out_dir.string() << '\n';
  return kExitOk;
}

int cmd_clean(const CommonOptions& o, std::ostream& out, std::ostream& err) {
  Context ctx = make_context(o, out, err);
  const Manifest m = require_manifest(o);
  const auto trips = load_trips(m, err);
  const auto cleaned = clean_trips(m, trips, ctx.run.pipeline.cleaning);

  StagedOutput staged(ctx.out_dir);
  std::ostringstream summary;
  summary << "driver_id,log,input_seconds,stop_seconds,gap_seconds,clean_seconds\n";
  std::set<std::string> used;
  for (std::size_t i = 0; i < cleaned.size(); ++i) {
    std::string stem = m.entries[i].path.stem().string();
    if (!used.insert(stem).second) {
      stem += "-" + std::to_string(i);
      used.insert(stem);
    }
    const auto& c = cleaned[i];
    staged.add(stem + ".clean.csv",
               to_string_with([&](std::ostream& os) { write_log(os, c.as_trip()); }));
    staged.add(stem + ".clean.json",
               to_string_with([&](std::ostream& os) { write_clean_sidecar(os, c); }));
    summary << c.driver_id << ',' << m.entries[i].path.filename().string() << ','
            << c.input_seconds << ',' << c.removed_stop_seconds << ',' << c.removed_gap_seconds
            << ',' << c.clean_seconds() << '\n';
  }
  staged.add("clean_summary.csv", summary.str());
  staged.commit();
  out << "cleaned " << cleaned.size() << " trips into " << ctx.out_dir.string() << '\n';
  return kExitOk;
}

int cmd_featurize(const CommonOptions& o, std::ostream& out, std::ostream& err) {
  Context ctx = make_context(o, out, err);
  const Manifest m = require_manifest(o);
  const auto& p = ctx.run.pipeline;
  const auto cleaned = clean_trips(m, load_trips(m, err), p.cleaning);
  const FeatureSet fs = featurize(cleaned, p.segmentation, p.features);

  StagedOutput staged(ctx.out_dir);
  staged.add("features_train.csv",
             to_string_with([&](std::ostream& os) { write_feature_csv(os, fs.train); }));
  staged.add("features_test.csv",
             to_string_with([&](std::ostream& os) { write_feature_csv(os, fs.test); }));
  staged.add("schema.json", to_string_with([&](std::ostream& os) {
               write_schema_json(os, *fs.schema, p.features);
             }));
  staged.commit();
  out << fs.train.size() << " train and " << fs.test.size() << " test windows, "
      << fs.schema->size() << " features\n";
  return kExitOk;
}

struct TrainOptions {
  std::string kind;
};

int cmd_train(const CommonOptions& o, const TrainOptions& t, std::ostream& out,
              std::ostream& err) {
  Context ctx = make_context(o, out, err);
  auto& p = ctx.run.pipeline;
  if (!t.kind.empty()) {
    const auto kind = parse_model_kind(t.kind);
    if (!kind) throw ConfigError("unknown model kind '" + t.kind + "'");
    p.model.kind = *kind;
    p.validate();
  }
  const Manifest m = require_manifest(o);
  const auto cleaned = clean_trips(m, load_trips(m, err), p.cleaning);
  const FeatureSet fs = featurize(cleaned, p.segmentation, p.features);
  const auto train = LabeledDataset::from_vectors(fs.train);
  const TrainedModel model = train_model(train, seeded_model(p.model, model_seed(p.seed)));

  json report;
  report["manifest"] = m.name;
  report["model"] = p.model.name();
  report["classes"] = model.class_list;
  report["feature_dimension"] = fs.schema->size();
  report["train_windows"] = fs.train.size();
  report["test_windows"] = fs.test.size();
  auto counts = json::array();
  for (const auto& c : fs.counts) {
    counts.push_back({{"driver_id", c.driver_id}, {"train", c.train}, {"test", c.test}});
  }
  report["window_counts"] = counts;
  report["seeds"] = seeds_json(p.seed);
  report["config"] = json::parse(config_snapshot_json(p));

  StagedOutput staged(ctx.out_dir);
  staged.add("model.json", to_string_with([&](std::ostream& os) { save_model(os, model); }));
  staged.add("train_report.json", report.dump(2) + "\n");
  staged.commit();
  out << "trained " << p.model.name() << " on " << fs.train.size() << " windows from "
      << model.class_list.size() << " drivers\n";
  return kExitOk;
}

struct EvaluateOptions {
  std::string model;
};

int cmd_evaluate(const CommonOptions& o, const EvaluateOptions& e, std::ostream& out,
                 std::ostream& err) {
  Context ctx = make_context(o, out, err);
  const auto& p = ctx.run.pipeline;
  const std::filesystem::path model_path =
      e.model.empty() ? ctx.out_dir / "model.json" : std::filesystem::path(e.model);
  const FeatureSchema expected = make_schema(p.features);
  const TrainedModel model = load_model_file(model_path, &expected);

  const Manifest m = require_manifest(o);
  const auto cleaned = clean_trips(m, load_trips(m, err), p.cleaning);
  const FeatureSet fs = featurize(cleaned, p.segmentation, p.features);
  const auto test = LabeledDataset::from_vectors(fs.test);
  EvaluationReport report = evaluate(model, test);
  PipelineConfig snapshot = p;
  snapshot.model.kind = model.kind;
  report.config_snapshot = config_snapshot_json(snapshot);

  StagedOutput staged(ctx.out_dir);
  staged.add("evaluation.csv",
             to_string_with([&](std::ostream& os) { write_evaluation_csv(os, report); }));
  staged.add("evaluation.json",
             to_string_with([&](std::ostream& os) { write_evaluation_json(os, report); }));
  staged.commit();
  out << "accuracy " << report.accuracy << " over " << report.n_test_windows
      << " test windows\n";
  return kExitOk;
}

struct GridOptions {
  std::vector<std::string> features;
  std::string models;
  std::optional<std::size_t> repetitions;
  std::optional<std::size_t> stop_after;
};

int cmd_grid(const CommonOptions& o, const GridOptions& g, std::ostream& out,
             std::ostream& err) {
  Context ctx = make_context(o, out, err);
  const auto& p = ctx.run.pipeline;
  GridSpec spec;
  if (ctx.run.grid) {
    spec = *ctx.run.grid;
  } else {
    spec.feature_subsets = {p.features};
    spec.models = {p.model};
  }
  if (!g.features.empty()) {
    spec.feature_subsets.clear();
    for (const auto& f : g.features) {
      for (auto& c : parse_feature_list(f)) spec.feature_subsets.push_back(c);
    }
  }
  if (!g.models.empty()) spec.models = parse_model_list(g.models, p.model);
  if (g.repetitions) spec.repetitions = *g.repetitions;
  spec.validate();

  const Manifest m = require_manifest(o);
  const auto cleaned = clean_trips(m, load_trips(m, err), p.cleaning);

  g_interrupted.store(false);
  auto previous = std::signal(SIGINT, on_sigint);
  const auto progress = [&](const GridRow& row, std::size_t done, std::size_t total) {
    err << "[" << done << "/" << total << "] " << row.window_minutes << " min, "
        << row.overlap * 100.0 << "% overlap, " << row.features << ", " << row.model << ": ";
    if (row.ok()) {
      err << row.mean_accuracy << '\n';
    } else {
      err << "failed (" << row.note << ")\n";
    }
    if (g.stop_after && done >= *g.stop_after) return false;
    return !g_interrupted.load();
  };
  GridResult result;
  try {
    result = run_grid(cleaned, spec, p, progress);
  } catch (...) {
    std::signal(SIGINT, previous);
    throw;
  }
  std::signal(SIGINT, previous);

  const RenderedReport r = render_report(result.rows, result.complete);
  StagedOutput staged(ctx.out_dir);
  staged.add("grid.csv", r.csv);
  staged.add("grid.json", r.json);
  staged.add("grid.txt", r.text);
  staged.commit();
  out << r.text;
  if (!result.complete) {
    err << "grid interrupted after " << result.rows.size() << " of " << result.total_cells
        << " cells; partial report written\n";
  }
  return kExitOk;
}

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config, "Run configuration (INI)");
  cmd->add_option("--manifest", o.manifest, "Manifest CSV: path,driver_id,rate_hz");
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--seed", o.seed, "Master seed (overrides [run] seed)");
}

}  // namespace

void request_interrupt() { g_interrupted.store(true); }

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Driver identification from smartphone IMU logs", "driverid"};
  app.require_subcommand(1);

  CommonOptions common;
  SynthOptions synth;
  TrainOptions train;
  EvaluateOptions eval;
  GridOptions grid;

  auto* c_synth = app.add_subcommand("synth", "Generate synthetic trips and a manifest");
  add_common(c_synth, common);
  c_synth->add_option("--drivers", synth.drivers, "Number of drivers");
  c_synth->add_option("--hours", synth.hours, "Trip length per driver in hours");
  c_synth->add_option("--separation", synth.separation, "easy or hard");
  c_synth->add_option("--rate", synth.rate, "Sampling rate in Hz");

  auto* c_clean = app.add_subcommand("clean", "Clean trips and report removed time");
  add_common(c_clean, common);

  auto* c_feat = app.add_subcommand("featurize", "Write train/test feature matrices");
  add_common(c_feat, common);

  auto* c_train = app.add_subcommand("train", "Train a model on the train partition");
  add_common(c_train, common);
  c_train->add_option("--kind", train.kind, "knn, dtree, rforest or mlp");

  auto* c_eval = app.add_subcommand("evaluate", "Score a model on the test partition");
  add_common(c_eval, common);
  c_eval->add_option("--model", eval.model, "Model file (default <out>/model.json)");

  auto* c_grid = app.add_subcommand("grid", "Sweep windows, overlaps, features and models");
  add_common(c_grid, common);
  c_grid->add_option("--features", grid.features, "Feature subset(s), e.g. histogram+mean");
  c_grid->add_option("--models", grid.models, "Comma-separated model kinds");
  c_grid->add_option("--repetitions", grid.repetitions, "Runs per cell");
  c_grid->add_option("--stop-after", grid.stop_after, "Stop after this many cells");

  std::vector<std::string> argv_store{"driverid"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (c_synth->parsed()) return cmd_synth(common, synth, out, err);
    if (c_clean->parsed()) return cmd_clean(common, out, err);
    if (c_feat->parsed()) return cmd_featurize(common, out, err);
    if (c_train->parsed()) return cmd_train(common, train, out, err);
    if (c_eval->parsed()) return cmd_evaluate(common, eval, out, err);
    if (c_grid->parsed()) return cmd_grid(common, grid, out, err);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const SchemaMismatch& e) {
    err << "schema mismatch: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace driverid::cli
