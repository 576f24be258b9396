#include "kgamc/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <optional>

#include "kgamc/dataio.hpp"
#include "kgamc/eval.hpp"
#include "kgamc/mkg.hpp"
#include "kgamc/modulation.hpp"
#include "kgamc/parallel.hpp"
#include "kgamc/sigsyn.hpp"
#include "kgamc/trainer.hpp"
#include "kgamc/version.hpp"

namespace kgamc::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

int parse_int(std::string_view text, std::string_view what) {
  std::string s(text);
  std::size_t used = 0;
  long v = 0;
  try {
    v = std::stol(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (s.empty() || used != s.size() || v < std::numeric_limits<std::int16_t>::min() ||
      v > std::numeric_limits<std::int16_t>::max()) {
    throw UsageError("bad " + std::string(what) + " '" + s + "'");
  }
  return static_cast<int>(v);
}

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

// Run record written next to every output.
class Manifest {
 public:
  Manifest(std::string command, const std::vector<std::string>& args) : start_(Clock::now()) {
    j_["command"] = std::move(command);
    j_["argv"] = args;
    j_["tool_version"] = kVersion;
    j_["started_utc"] = utc_now();
    j_["threads"] = worker_threads();
  }

  json& operator[](const char* key) { return j_[key]; }

  // Seconds spent since the previous mark, recorded under name.
  void mark(const std::string& name) {
    const auto now = Clock::now();
    j_["timings_s"][name] = std::chrono::duration<double>(now - last_).count();
    last_ = now;
  }

  void write(const fs::path& path) {
    j_["timings_s"]["total"] = std::chrono::duration<double>(Clock::now() - start_).count();
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << j_.dump(2) << '\n';
  }

 private:
  json j_;
  Clock::time_point start_;
  Clock::time_point last_ = Clock::now();
};

fs::path manifest_for_file(const fs::path& out) {
  return fs::path(out.string() + ".manifest.json");
}

void ensure_parent(const fs::path& file) {
  const auto parent = file.parent_path();
  if (parent.empty()) return;
  std::error_code ec;
  fs::create_directories(parent, ec);
  if (ec) throw IoError("cannot create " + parent.string() + ": " + ec.message());
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

mkg::TripleSet load_kg(const std::string& path) {
  return path.empty() ? mkg::parse_triples(mkg::default_triples_text()) : mkg::load_triples(path);
}

json train_config_json(const trainer::TrainConfig& c) {
  return {{"epochs", c.epochs},           {"batch_size", c.batch_size},
          {"lr_msnet", c.lr_msnet},       {"lr_rgcn", c.lr_rgcn},
          {"weight_decay", c.weight_decay}, {"step_epochs", c.step_epochs},
          {"step_factor", c.step_factor}, {"lambda", c.lambda},
          {"d", c.d},                     {"seed", c.seed}};
}

void check_model_matches(const Dataset& ds, const trainer::ModelState<float>& state) {
  if (ds.class_names != state.class_names) {
    throw CheckpointError("dataset class table does not match the checkpoint's");
  }
  if (ds.frame_len != state.msnet_config.frame_len) {
    throw CheckpointError("dataset frame length " + std::to_string(ds.frame_len) +
                          " does not match the checkpoint's " +
                          std::to_string(state.msnet_config.frame_len));
  }
}

// ---- synth ----------------------------------------------------------------

struct SynthArgs {
  std::string out;
  std::string classes = "all";
  std::string snr = "-20:18:2";
  std::size_t frames_per_cell = 100;
  std::uint64_t seed = 0;
  std::size_t frame_len = 128;
  std::size_t sps = 8;
  double rolloff = 0.35;
};

int cmd_synth(const SynthArgs& a, const std::vector<std::string>& argv, std::ostream& out) {
  Manifest manifest("synth", argv);
  sigsyn::SynthConfig cfg;
  cfg.seed = a.seed;
  cfg.frame_len = a.frame_len;
  cfg.samples_per_symbol = a.sps;
  cfg.rrc_rolloff = a.rolloff;
  cfg.snr_grid = parse_snr_range(a.snr);
  cfg.classes = parse_class_list(a.classes);
  if (a.frames_per_cell == 0) throw ConfigError("--frames-per-cell must be positive");
  const auto ds = sigsyn::synth_dataset(cfg, a.frames_per_cell);
  manifest.mark("synthesize");
  ensure_parent(a.out);
  dataio::write_dataset(ds, a.out);
  manifest.mark("write");
  manifest["seed"] = a.seed;
  manifest["config"] = {{"classes", ds.class_names}, {"snr_grid", cfg.snr_grid},
                        {"frames_per_cell", a.frames_per_cell}, {"frame_len", cfg.frame_len},
                        {"samples_per_symbol", cfg.samples_per_symbol},
                        {"rrc_rolloff", cfg.rrc_rolloff}};
  manifest["outputs"] = {a.out};
  manifest.write(manifest_for_file(a.out));
  out << "wrote " << ds.frames.size() << " frames (" << ds.num_classes() << " classes x "
      << cfg.snr_grid.size() << " SNRs x " << a.frames_per_cell << ") to " << a.out << '\n';
  return kExitOk;
}

// ---- convert --------------------------------------------------------------

struct ConvertArgs {
  std::string in, out;
  std::size_t frame_len = 0;
};

int cmd_convert(const ConvertArgs& a, const std::vector<std::string>& argv, std::ostream& out) {
  Manifest manifest("convert", argv);
  const auto ds = dataio::convert_csv_directory(a.in, a.frame_len);
  manifest.mark("read");
  ensure_parent(a.out);
  dataio::write_dataset(ds, a.out);
  manifest["config"] = {{"frame_len", ds.frame_len}, {"classes", ds.class_names}};
  manifest["inputs"] = {a.in};
  manifest["outputs"] = {a.out};
  manifest.write(manifest_for_file(a.out));
  out << "converted " << ds.frames.size() << " frames of length " << ds.frame_len << " to "
      << a.out << '\n';
  return kExitOk;
}

// ---- kg -------------------------------------------------------------------

struct KgArgs {
  std::string triples;
  bool as_json = false;
  std::string manifest;
};

int cmd_kg_validate(const KgArgs& a, const std::vector<std::string>& argv, std::ostream& out) {
  Manifest manifest("kg validate", argv);
  const auto set = load_kg(a.triples);
  const auto violations = mkg::validate_ontology(set);
  for (const auto& v : violations) out << "violation: " << v.message << '\n';
  out << (a.triples.empty() ? std::string("default MKG") : a.triples) << ": "
      << set.triples.size() << " triples, " << violations.size() << " violation(s)\n";
  if (!a.manifest.empty()) {
    manifest["inputs"] = {a.triples.empty() ? "<default>" : a.triples};
    manifest["result"] = {{"triples", set.triples.size()}, {"violations", violations.size()}};
    manifest.write(a.manifest);
  }
  return violations.empty() ? kExitOk : kExitValidation;
}

int cmd_kg_inspect(const KgArgs& a, const std::vector<std::string>& argv, std::ostream& out) {
  Manifest manifest("kg inspect", argv);
  const auto g = mkg::build_graph(load_kg(a.triples));
  json report;
  report["nodes"] = g.num_nodes();
  report["edges"] = g.num_edges();
  report["feature_width"] = mkg::feature_width(g.num_nodes());
  std::map<std::string, std::size_t> by_type;
  for (auto t : g.types) ++by_type[std::string(mkg::to_string(t))];
  for (std::size_t t = 0; t < mkg::kNumNodeTypes; ++t) {
    const std::string name(mkg::to_string(static_cast<mkg::NodeType>(t)));
    report["node_types"][name] = by_type[name];
  }
  for (std::size_t r = 0; r < mkg::kNumRelations; ++r) {
    report["relations"][std::string(mkg::to_string(static_cast<mkg::RelationType>(r)))] =
        g.edges[r].size();
  }
  json anchor_map = json::object();
  for (std::size_t i = 0; i < g.num_nodes(); ++i) {
    if (g.types[i] == mkg::NodeType::modulationMethod) anchor_map[g.names[i]] = i;
  }
  report["anchors"] = anchor_map;

  if (a.as_json) {
    out << report.dump(2) << '\n';
  } else {
    out << "nodes " << g.num_nodes() << "\nedges " << g.num_edges() << "\nfeature_width "
        << mkg::feature_width(g.num_nodes()) << "\nnode types:\n";
    for (const auto& [name, n] : report["node_types"].items()) out << "  " << name << ' ' << n << '\n';
    out << "relations:\n";
    for (const auto& [name, n] : report["relations"].items()) out << "  " << name << ' ' << n << '\n';
    out << "anchors:\n";
    for (const auto& [name, idx] : anchor_map.items()) out << "  " << name << " -> node " << idx << '\n';
  }
  if (!a.manifest.empty()) {
    manifest["inputs"] = {a.triples.empty() ? "<default>" : a.triples};
    manifest["result"] = report;
    manifest.write(a.manifest);
  }
  return kExitOk;
}

// ---- train ----------------------------------------------------------------

struct TrainArgs {
  std::string data, test, kg, out;
  double train_fraction = 0.8;
  trainer::TrainConfig cfg;
};

int cmd_train(TrainArgs a, const std::vector<std::string>& argv, std::ostream& out) {
  Manifest manifest("train", argv);
  a.cfg.validate();
  if (!(a.train_fraction > 0 && a.train_fraction <= 1)) {
    throw ConfigError("--train-fraction must lie in (0, 1]");
  }
  const auto graph = mkg::build_graph(load_kg(a.kg));
  const auto full = dataio::read_dataset(a.data);
  Dataset train_ds, test_ds;
  std::vector<std::string> split_warnings;
  if (!a.test.empty()) {
    train_ds = full;
    test_ds = dataio::read_dataset(a.test);
  } else if (a.train_fraction == 1.0) {
    train_ds = full;
  } else {
    auto parts = dataio::split(full, a.train_fraction, a.cfg.seed);
    train_ds = std::move(parts.train);
    test_ds = std::move(parts.test);
    split_warnings = std::move(parts.warnings);
  }
  manifest.mark("load");
  ensure_dir(a.out);
  const fs::path out_dir(a.out);
  const auto log_path = out_dir / "history.jsonl";
  std::ofstream log(log_path, std::ios::trunc);
  if (!log) throw IoError("cannot write " + log_path.string());

  trainer::TrainHooks hooks;
  hooks.on_epoch = [&](const trainer::EpochRecord& r) {
    const auto line = trainer::epoch_json(r);
    log << line << '\n';
    log.flush();
    out << "epoch " << r.epoch << "/" << a.cfg.epochs << "  l_total " << r.mean.l_total
        << "  train_acc " << r.train_acc << "  test_acc " << r.test_acc << "  anchor_cos "
        << r.anchor_mean_cos << '\n';
    out.flush();
  };
  const auto result = trainer::train<float>(train_ds, test_ds, graph, a.cfg, hooks);
  manifest.mark("train");

  const auto ckpt = out_dir / "model.kgmc";
  trainer::save_checkpoint(result.state, ckpt);
  std::vector<std::string> outputs{ckpt.string(), log_path.string()};
  if (a.test.empty() && !test_ds.frames.empty()) {
    dataio::write_dataset(test_ds, out_dir / "test.amcd");
    outputs.push_back((out_dir / "test.amcd").string());
  }
  manifest.mark("save");

  manifest["seed"] = a.cfg.seed;
  manifest["config"] = train_config_json(a.cfg);
  manifest["config"]["train_fraction"] = a.train_fraction;
  manifest["inputs"] = {{"data", a.data}, {"test", a.test}, {"kg", a.kg.empty() ? "<default>" : a.kg}};
  manifest["outputs"] = outputs;
  manifest["split_warnings"] = split_warnings;
  manifest["train_frames"] = train_ds.frames.size();
  manifest["test_frames"] = test_ds.frames.size();
  const auto& last = result.history.epochs.back();
  manifest["final"] = json::parse(trainer::epoch_json(last));
  manifest.write(out_dir / "manifest.json");
  out << "saved " << ckpt.string() << '\n';
  return kExitOk;
}

// ---- eval -----------------------------------------------------------------

struct EvalArgs {
  std::string data, ckpt, mode = "classifier", out;
  std::string confusion_snrs = "0";
  int min_snr = 0;
};

int cmd_eval(const EvalArgs& a, const std::vector<std::string>& argv, std::ostream& out) {
  Manifest manifest("eval", argv);
  const auto mode = trainer::parse_infer_mode(a.mode);
  const auto confusion_snrs = parse_snr_range(a.confusion_snrs);
  const auto ds = dataio::read_dataset(a.data);
  const auto state = trainer::load_checkpoint(a.ckpt);
  check_model_matches(ds, state);
  manifest.mark("load");
  const auto pred = trainer::infer<float>(ds.frames, state, mode);
  manifest.mark("infer");
  std::vector<int> labels, snrs;
  for (const auto& f : ds.frames) {
    labels.push_back(f.label);
    snrs.push_back(f.snr_db);
  }
  const auto report = eval::evaluate(pred.labels, labels, snrs, pred.features, pred.dim,
                                     ds.class_names, a.mode, confusion_snrs, a.min_snr);
  eval::export_report(report, pred.features, pred.dim, labels, snrs, a.out);
  manifest.mark("report");

  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << "overall accuracy " << report.accuracy.overall << " (" << report.accuracy.total_correct
      << "/" << report.accuracy.total << ", mode " << a.mode << ")\n";
  for (const auto& [snr, acc] : report.accuracy.per_snr) {
    out << "  snr " << snr << " dB: " << acc << '\n';
  }
  if (report.cluster) {
    out << "intra_class_cos " << report.cluster->intra_cos << "  inter_class_cos "
        << report.cluster->inter_cos << "  silhouette " << report.cluster->silhouette << '\n';
  }
  manifest["config"] = {{"mode", a.mode}, {"confusion_snrs", confusion_snrs},
                        {"min_snr", a.min_snr}};
  manifest["seed"] = state.train_config.seed;
  manifest["inputs"] = {{"data", a.data}, {"ckpt", a.ckpt}};
  manifest["outputs"] = {a.out};
  manifest["overall_accuracy"] = report.accuracy.overall;
  manifest.write(fs::path(a.out) / "manifest.json");
  return kExitOk;
}

// ---- infer ----------------------------------------------------------------

struct InferArgs {
  std::string data, frame, ckpt, mode = "classifier", out = "-";
  std::optional<std::size_t> index;
};

int cmd_infer(const InferArgs& a, const std::vector<std::string>& argv, std::ostream& out) {
  Manifest manifest("infer", argv);
  if (a.data.empty() == a.frame.empty()) throw UsageError("give exactly one of --data or --frame");
  const auto mode = trainer::parse_infer_mode(a.mode);
  const auto state = trainer::load_checkpoint(a.ckpt);
  std::vector<SignalFrame> frames;
  bool labelled = false;
  if (!a.data.empty()) {
    auto ds = dataio::read_dataset(a.data);
    check_model_matches(ds, state);
    labelled = true;
    if (a.index) {
      if (*a.index >= ds.frames.size()) {
        throw ConfigError("--index " + std::to_string(*a.index) + " out of range (" +
                          std::to_string(ds.frames.size()) + " frames)");
      }
      frames.push_back(std::move(ds.frames[*a.index]));
    } else {
      frames = std::move(ds.frames);
    }
  } else {
    frames.push_back(dataio::read_csv_frame(a.frame));
    if (frames.back().length() != state.msnet_config.frame_len) {
      throw ShapeError("frame has " + std::to_string(frames.back().length()) +
                       " samples, model expects " + std::to_string(state.msnet_config.frame_len));
    }
  }
  manifest.mark("load");
  const auto pred = trainer::infer<float>(frames, state, mode);
  manifest.mark("infer");

  std::ofstream file;
  if (a.out != "-") {
    ensure_parent(a.out);
    file.open(a.out, std::ios::trunc);
    if (!file) throw IoError("cannot write " + a.out);
  }
  std::ostream& csv = a.out == "-" ? out : file;
  csv << std::setprecision(std::numeric_limits<float>::max_digits10);
  csv << "index,true_label,snr_db,label";
  for (const auto& name : state.class_names) csv << ",p_" << name;
  csv << '\n';
  const std::size_t m = pred.num_classes;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const std::size_t index = a.index ? *a.index : i;
    csv << index << ',';
    if (labelled) csv << state.class_names[frames[i].label];
    csv << ',';
    if (labelled) {
      if (frames[i].snr_db == kNoiselessSnr) {
        csv << "noiseless";
      } else {
        csv << frames[i].snr_db;
      }
    }
    csv << ',' << state.class_names[static_cast<std::size_t>(pred.labels[i])];
    for (std::size_t k = 0; k < m; ++k) csv << ',' << pred.scores[i * m + k];
    csv << '\n';
  }
  if (a.out != "-") {
    manifest["config"] = {{"mode", a.mode}};
    manifest["seed"] = state.train_config.seed;
    manifest["inputs"] = {{"data", a.data}, {"frame", a.frame}, {"ckpt", a.ckpt}};
    manifest["outputs"] = {a.out};
    manifest["frames"] = frames.size();
    manifest.write(manifest_for_file(a.out));
  }
  return kExitOk;
}

}  // namespace

std::vector<int> parse_snr_range(std::string_view text) {
  std::vector<int> out;
  if (text.empty()) throw UsageError("empty SNR specification");
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    const auto item = text.substr(pos, comma == std::string_view::npos ? text.npos : comma - pos);
    std::vector<std::string_view> parts;
    std::size_t p = 0;
    while (true) {
      const auto colon = item.find(':', p);
      parts.push_back(item.substr(p, colon == std::string_view::npos ? item.npos : colon - p));
      if (colon == std::string_view::npos) break;
      p = colon + 1;
    }
    if (parts.size() == 1) {
      out.push_back(parse_int(parts[0], "SNR"));
    } else if (parts.size() == 3) {
      const int start = parse_int(parts[0], "SNR range start");
      const int stop = parse_int(parts[1], "SNR range stop");
      const int step = parse_int(parts[2], "SNR range step");
      if (step == 0 || (stop - start) * step < 0) {
        throw UsageError("SNR range '" + std::string(item) + "' never reaches its stop value");
      }
      for (int v = start; step > 0 ? v <= stop : v >= stop; v += step) out.push_back(v);
    } else {
      throw UsageError("SNR range '" + std::string(item) + "' is not start:stop:step");
    }
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  std::sort(out.begin(), out.end());
  if (std::adjacent_find(out.begin(), out.end()) != out.end()) {
    throw UsageError("SNR specification '" + std::string(text) + "' repeats a value");
  }
  return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Knowledge-graph-driven automatic modulation classification", "kgamc"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Synthesize a labeled I/Q dataset");
  s->add_option("--out", synth.out, "Output AMCD file")->required();
  s->add_option("--classes", synth.classes, "'all' or a comma list of class names")
      ->capture_default_str();
  s->add_option("--snr", synth.snr, "SNR grid start:stop:step in dB, inclusive")
      ->capture_default_str();
  s->add_option("--frames-per-cell", synth.frames_per_cell, "Frames per class and SNR")
      ->capture_default_str();
  s->add_option("--seed", synth.seed)->capture_default_str();
  s->add_option("--frame-len", synth.frame_len)->capture_default_str();
  s->add_option("--sps", synth.sps, "Samples per symbol")->capture_default_str();
  s->add_option("--rolloff", synth.rolloff, "Root-raised-cosine roll-off")->capture_default_str();

  ConvertArgs convert;
  auto* c = app.add_subcommand("convert", "Convert a directory of <CLASS>_<SNR>.csv frames to AMCD");
  c->add_option("--in", convert.in, "Directory of CSV frames")->required();
  c->add_option("--out", convert.out, "Output AMCD file")->required();
  c->add_option("--frame-len", convert.frame_len, "0 takes the first file's length")
      ->capture_default_str();

  KgArgs kg;
  auto* k = app.add_subcommand("kg", "Knowledge graph tools");
  k->require_subcommand(1);
  auto* kv = k->add_subcommand("validate", "Check every triple against the ontology");
  auto* ki = k->add_subcommand("inspect", "Print node, edge and type counts and the anchor map");
  for (auto* sub : {kv, ki}) {
    sub->add_option("--triples", kg.triples, "Triple TSV file (default: shipped MKG)");
    sub->add_option("--manifest", kg.manifest, "Write a run manifest here");
  }
  ki->add_flag("--json", kg.as_json, "Machine-readable output");

  TrainArgs train;
  auto* t = app.add_subcommand("train", "Jointly train RGCN, MSNet and classifier");
  t->add_option("--data", train.data, "Training AMCD file (split 8:2 unless --test)")->required();
  t->add_option("--test", train.test, "Separate test AMCD file");
  t->add_option("--kg", train.kg, "Triple TSV file (default: shipped MKG)");
  t->add_option("--out", train.out, "Run directory")->required();
  t->add_option("--epochs", train.cfg.epochs)->capture_default_str();
  t->add_option("--batch", train.cfg.batch_size)->capture_default_str();
  t->add_option("--lambda", train.cfg.lambda, "Metric loss weight; 0 trains the baseline")
      ->capture_default_str();
  t->add_option("--seed", train.cfg.seed)->capture_default_str();
  t->add_option("--lr-msnet", train.cfg.lr_msnet)->capture_default_str();
  t->add_option("--lr-rgcn", train.cfg.lr_rgcn)->capture_default_str();
  t->add_option("--weight-decay", train.cfg.weight_decay)->capture_default_str();
  t->add_option("--step-epochs", train.cfg.step_epochs)->capture_default_str();
  t->add_option("--step-factor", train.cfg.step_factor)->capture_default_str();
  t->add_option("--d", train.cfg.d, "Feature dimension")->capture_default_str();
  t->add_option("--train-fraction", train.train_fraction)->capture_default_str();

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Evaluate a checkpoint and export reports");
  e->add_option("--data", ev.data, "AMCD file to evaluate")->required();
  e->add_option("--ckpt", ev.ckpt, "KGMC checkpoint")->required();
  e->add_option("--mode", ev.mode, "classifier or anchor")->capture_default_str();
  e->add_option("--out", ev.out, "Report directory")->required();
  e->add_option("--confusion-snr", ev.confusion_snrs, "SNRs with their own confusion matrix")
      ->capture_default_str();
  e->add_option("--min-snr", ev.min_snr, "Lowest SNR included in the cluster metrics")
      ->capture_default_str();

  InferArgs inf;
  auto* i = app.add_subcommand("infer", "Predict classes with per-class scores");
  i->add_option("--data", inf.data, "AMCD file");
  i->add_option("--frame", inf.frame, "Single frame as a two-column I,Q CSV");
  i->add_option("--index", inf.index, "Predict only this frame of --data");
  i->add_option("--ckpt", inf.ckpt, "KGMC checkpoint")->required();
  i->add_option("--mode", inf.mode, "classifier or anchor")->capture_default_str();
  i->add_option("--out", inf.out, "Predictions CSV, '-' for stdout")->capture_default_str();

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& ex) {
    const int code = app.exit(ex, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (s->parsed()) return cmd_synth(synth, args, out);
    if (c->parsed()) return cmd_convert(convert, args, out);
    if (kv->parsed()) return cmd_kg_validate(kg, args, out);
    if (ki->parsed()) return cmd_kg_inspect(kg, args, out);
    if (t->parsed()) return cmd_train(train, args, out);
    if (e->parsed()) return cmd_eval(ev, args, out);
    if (i->parsed()) return cmd_infer(inf, args, out);
    err << app.help();
    return kExitUsage;
  } catch (const UsageError& ex) {
    err << "usage error: " << ex.what() << '\n';
    return kExitUsage;
  } catch (const IoError& ex) {
    err << "error: " << ex.what() << '\n';
    return kExitRuntime;
  } catch (const ParseError& ex) {
    err << "invalid: line " << ex.line() << ": " << ex.what() << '\n';
    return kExitValidation;
  } catch (const FormatError& ex) {
    err << "invalid: " << ex.what() << " (byte " << ex.offset() << ")\n";
    return kExitValidation;
  } catch (const Error& ex) {
    // Config, ontology, checkpoint, shape and state errors.
    err << "invalid: " << ex.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace kgamc::cli
