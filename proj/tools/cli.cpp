#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "keyscope/audio/spectrogram.hpp"
#include "keyscope/audio/spectrogram_cache.hpp"
#include "keyscope/audio/wav.hpp"
#include "keyscope/data/manifest.hpp"
#include "keyscope/data/synth.hpp"
#include "keyscope/error.hpp"
#include "keyscope/eval/duration.hpp"
#include "keyscope/eval/relation.hpp"
#include "keyscope/models/checkpoint.hpp"
#include "keyscope/training/trainer.hpp"
#include "keyscope/util/csv.hpp"

namespace keyscope::cli {
namespace fs = std::filesystem;
namespace {

int default_workers() {
  if (const char* env = std::getenv("KEYSCOPE_WORKERS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return 1;
}

std::int64_t mtime_seconds(const fs::path& path) {
  const auto t = fs::last_write_time(path);
  return std::chrono::duration_cast<std::chrono::seconds>(t.time_since_epoch()).count();
}

// ---------------------------------------------------------------- extract

struct ExtractOptions {
  std::string manifest;
  std::string out_dir;
  int workers = 0;
};

int cmd_extract(const ExtractOptions& opt, std::ostream& out, std::ostream& err) {
  auto entries = data::load_manifest(opt.manifest);
  fs::create_directories(opt.out_dir);
  const audio::FilterBank fb = audio::build_filterbank();
  const std::uint64_t hash = audio::frontend_hash(fb.config);

  enum class Outcome { Extracted, Skipped, Failed };
  std::vector<Outcome> outcomes(entries.size(), Outcome::Failed);
  std::vector<std::string> messages(entries.size());
  std::atomic<std::size_t> next{0};

  const auto process = [&](std::size_t i) {
    const data::ManifestEntry entry = data::apply_classical_rule(entries[i]);
    if (entry.audio_path.empty()) {
      // Feature-only entries have nothing to extract.
      if (fs::exists(entry.feature_path)) {
        outcomes[i] = Outcome::Skipped;
      } else {
        messages[i] = "missing feature file " + entry.feature_path.string();
      }
      return;
    }
    const fs::path target = fs::path(opt.out_dir) / (entry.id + ".kspc");
    try {
      if (!fs::exists(entry.audio_path)) throw DataError("missing audio file " + entry.audio_path.string());
      const audio::CacheMetadata meta{mtime_seconds(entry.audio_path), hash};
      if (fs::exists(target) && audio::read_cache_metadata(target) == meta) {
        outcomes[i] = Outcome::Skipped;
        return;
      }
      const auto clip = audio::slice(audio::load_wav(entry.audio_path), entry.offset_s, entry.duration_s);
      audio::save_spectrogram(target, audio::compute_spectrogram(clip, fb), meta);
      outcomes[i] = Outcome::Extracted;
    } catch (const std::exception& e) {
      messages[i] = e.what();
    }
  };
  const auto worker = [&]() {
    for (std::size_t i = next++; i < entries.size(); i = next++) process(i);
  };
  const int workers = std::max(1, opt.workers > 0 ? opt.workers : default_workers());
  std::vector<std::thread> threads;
  for (int w = 1; w < workers; ++w) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();

  std::size_t extracted = 0, skipped = 0, failed = 0;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    switch (outcomes[i]) {
      case Outcome::Extracted: ++extracted; break;
      case Outcome::Skipped: ++skipped; break;
      case Outcome::Failed:
        ++failed;
        err << "failed " << entries[i].id << ": " << messages[i] << '\n';
        break;
    }
  }
  out << "extracted " << extracted << ", skipped " << skipped << ", failed " << failed << '\n';
  return failed > 0 ? kDataError : kSuccess;
}

// ------------------------------------------------------------------ train

struct TrainOptions {
  std::string arch = "allconv";
  int nf = 8;
  double dropout = 0.0;
  std::string manifest;
  std::string cache_dir;
  double snippet_seconds = 20.0;
  std::uint64_t seed = 0;
  std::string out = "model.knet";
  int epochs = 500;
  int batch_size = 32;
  int patience = 20;
  double lr = 0.01;
  bool no_augment = false;
  bool verbose = false;
};

int cmd_train(const TrainOptions& opt, std::ostream& out, std::ostream& err) {
  models::ArchitectureConfig arch;
  arch.kind = models::parse_arch(opt.arch);
  arch.n_feature_maps = opt.nf;
  arch.dropout_p = opt.dropout;
  arch.validate();

  training::TrainConfig tc;
  tc.max_epochs = opt.epochs;
  tc.batch_size = opt.batch_size;
  tc.patience = opt.patience;
  tc.learning_rate = opt.lr;
  tc.seed = opt.seed;
  tc.augment.enabled = !opt.no_augment;
  tc.snippet_frames = static_cast<int>(std::lround(opt.snippet_seconds * audio::kFrameRate));
  if (!(opt.snippet_seconds > 0.0) || tc.snippet_frames < 1) throw ConfigError("--snippet-seconds must be positive");
  tc.validate();

  const auto entries = data::load_manifest(opt.manifest);
  const fs::path cache_dir = opt.cache_dir.empty() ? fs::path(opt.manifest).parent_path() : fs::path(opt.cache_dir);
  std::vector<data::ManifestEntry> train_entries, valid_entries;
  for (const auto& e : entries) {
    if (e.split == data::Split::Train) train_entries.push_back(e);
    if (e.split == data::Split::Valid) valid_entries.push_back(e);
  }
  if (train_entries.empty()) throw DataError("manifest has no training entries");
  if (valid_entries.empty()) throw DataError("manifest has no validation entries");
  const auto train = data::load_pieces(train_entries, cache_dir);
  const auto valid = data::load_pieces(valid_entries, cache_dir);
  arch.n_bins = train.front().spec.bins();

  training::EpochCallback on_epoch;
  if (opt.verbose) {
    on_epoch = [&err](const training::EpochRecord& r) {
      err << "epoch " << r.epoch << " loss " << r.train_loss << " train_acc " << r.train_accuracy << " val_weighted "
          << r.val_weighted << '\n';
    };
  }
  const auto result = training::fit(models::build_model(arch, opt.seed), train, valid, tc, on_epoch);
  const auto& report = result.report;

  const fs::path model_path(opt.out);
  if (model_path.has_parent_path()) fs::create_directories(model_path.parent_path());
  nlohmann::json extra = {{"best_epoch", report.best_epoch},
                          {"best_val_weighted", report.best_val_weighted},
                          {"seed", opt.seed},
                          {"snippet_frames", tc.snippet_frames}};
  models::save_checkpoint(model_path, result.best, extra);

  fs::path csv_path = model_path, json_path = model_path;
  csv_path.replace_extension(".report.csv");
  json_path.replace_extension(".report.json");
  {
    std::ofstream f(csv_path);
    training::write_report_csv(f, report);
  }
  {
    std::ofstream f(json_path);
    training::write_report_json(f, report);
  }
  out << "best epoch " << report.best_epoch << ", validation weighted " << eval::format_percent(report.best_val_weighted)
      << ", train accuracy " << eval::format_percent(report.train_accuracy) << '\n';
  out << "wrote " << model_path.string() << '\n';
  return kSuccess;
}

// ---------------------------------------------------------------- predict

struct PredictOptions {
  std::string model;
  std::string input;
  std::string format = "csv";
};

int cmd_predict(const PredictOptions& opt, std::ostream& out, std::ostream&) {
  if (opt.format != "csv" && opt.format != "json") throw ConfigError("--format must be csv or json");
  const models::Model model = models::load_checkpoint(opt.model);

  const fs::path input(opt.input);
  audio::LogFreqSpectrogram spec;
  if (input.extension() == ".kspc") {
    try {
      spec = audio::load_spectrogram(input);
    } catch (const LoadError& e) {
      throw DataError(e.what());
    }
  } else {
    spec = audio::compute_spectrogram(audio::load_wav(input), audio::build_filterbank());
  }
  const auto p = models::predict(model, spec);
  const std::string id = input.stem().string();
  const std::string label = eval::format_key_label(p.key);

  if (opt.format == "json") {
    nlohmann::ordered_json j = {{"id", id}, {"key", label}, {"index", p.index}};
    nlohmann::ordered_json dist = nlohmann::ordered_json::object();
    for (int k = 0; k < eval::kNumKeys; ++k) {
      dist[eval::format_key_label(eval::KeyLabel::from_index(k))] = p.distribution[static_cast<std::size_t>(k)];
    }
    j["distribution"] = dist;
    out << j.dump(2) << '\n';
    return kSuccess;
  }
  out << "id,key_label,class_index";
  for (int k = 0; k < eval::kNumKeys; ++k) out << ",p" << k;
  out << '\n' << csv::escape(id) << ',' << csv::escape(label) << ',' << p.index << std::fixed << std::setprecision(6);
  for (double v : p.distribution) out << ',' << v;
  out << '\n';
  return kSuccess;
}

// --------------------------------------------------------------- evaluate

std::size_t column_of(const std::vector<std::string>& header, std::initializer_list<const char*> names,
                      const std::string& file) {
  for (const char* name : names) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it != header.end()) return static_cast<std::size_t>(it - header.begin());
  }
  throw DataError(file + ": missing column '" + *names.begin() + "'");
}

// id -> text of the requested column, in file order.
std::vector<std::pair<std::string, std::string>> read_id_column(const std::string& path,
                                                                std::initializer_list<const char*> names) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  const auto rows = csv::read_rows(in);
  if (rows.empty()) throw DataError(path + ": empty file");
  const std::size_t id_col = column_of(rows[0].fields, {"id"}, path);
  const std::size_t value_col = column_of(rows[0].fields, names, path);
  std::vector<std::pair<std::string, std::string>> out;
  std::set<std::string> seen;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& f = rows[r].fields;
    if (f.size() <= std::max(id_col, value_col)) {
      throw ParseError(path + ":" + std::to_string(rows[r].line) + ": too few fields");
    }
    if (!seen.insert(f[id_col]).second) {
      throw DataError(path + ":" + std::to_string(rows[r].line) + ": duplicate id '" + f[id_col] + "'");
    }
    out.emplace_back(f[id_col], f[value_col]);
  }
  return out;
}

struct EvaluateOptions {
  std::string predictions;
  std::string reference;
  std::string durations;
  std::string duration_out = "duration_report.csv";
};

int cmd_evaluate(const EvaluateOptions& opt, std::ostream& out, std::ostream& err) {
  const auto preds = read_id_column(opt.predictions, {"key_label", "key"});
  const auto refs = read_id_column(opt.reference, {"key_label", "key"});
  std::map<std::string, eval::KeyLabel> pred_by_id;
  for (const auto& [id, text] : preds) pred_by_id.emplace(id, eval::parse_key_label(text));

  std::vector<std::string> missing;
  std::set<std::string> ref_ids;
  std::vector<std::pair<eval::KeyLabel, eval::KeyLabel>> pairs;
  std::map<std::string, bool> correct_by_id;
  for (const auto& [id, text] : refs) {
    ref_ids.insert(id);
    const auto it = pred_by_id.find(id);
    if (it == pred_by_id.end()) {
      missing.push_back(id);
      continue;
    }
    const auto target = eval::parse_key_label(text);
    pairs.emplace_back(it->second, target);
    correct_by_id[id] = it->second == target;
  }
  std::vector<std::string> extra;
  for (const auto& [id, text] : preds) {
    if (!ref_ids.count(id)) extra.push_back(id);
  }
  if (!missing.empty() || !extra.empty()) {
    for (const auto& id : missing) err << "missing prediction for id " << id << '\n';
    for (const auto& id : extra) err << "prediction without reference for id " << id << '\n';
    throw DataError("prediction and reference ids differ");
  }

  const auto s = eval::score(pairs);
  out << "Weighted,Correct,Fifth,Relative,Parallel,Other,n\n";
  out << eval::format_percent(s.weighted) << ',' << eval::format_percent(s.correct) << ','
      << eval::format_percent(s.fifth) << ',' << eval::format_percent(s.relative) << ','
      << eval::format_percent(s.parallel) << ',' << eval::format_percent(s.other) << ',' << s.n << '\n';

  if (!opt.durations.empty()) {
    std::vector<eval::DurationItem> items;
    for (const auto& [id, text] : read_id_column(opt.durations, {"duration_s", "duration"})) {
      const auto it = correct_by_id.find(id);
      if (it == correct_by_id.end()) throw DataError(opt.durations + ": unknown id '" + id + "'");
      double d = 0.0;
      try {
        d = std::stod(text);
      } catch (const std::exception&) {
        throw ParseError(opt.durations + ": bad duration '" + text + "' for id '" + id + "'");
      }
      items.push_back({d, it->second});
    }
    if (items.empty()) throw DataError(opt.durations + ": no durations");
    const auto stats = eval::duration_report(items);
    std::ofstream f(opt.duration_out);
    if (!f) throw Error("cannot write " + opt.duration_out);
    eval::write_duration_csv(f, stats);
    out << "\ngroup,n,median,lower_quartile,upper_quartile\n";
    for (const auto& [name, g] : {std::pair{"correct", &stats.correct}, std::pair{"incorrect", &stats.incorrect}}) {
      out << name << ',' << g->n << ',' << g->median << ',' << g->lower_quartile << ',' << g->upper_quartile << '\n';
    }
  }
  return kSuccess;
}

// ------------------------------------------------------------------ synth

struct SynthOptions {
  int pieces = 48;
  std::uint64_t seed = 0;
  std::string out_dir;
  double duration = 24.0;
  double train_ratio = 0.8;
  int workers = 0;
};

int cmd_synth(const SynthOptions& opt, std::ostream& out, std::ostream&) {
  if (opt.pieces < 1) throw ConfigError("--pieces must be >= 1");
  if (!(opt.train_ratio >= 0.0 && opt.train_ratio <= 1.0)) throw ConfigError("--train-ratio must be in [0, 1]");
  data::SynthOptions so;
  so.duration_s = opt.duration;
  so.workers = opt.workers > 0 ? opt.workers : default_workers();
  so.split_ratios = {opt.train_ratio, 1.0 - opt.train_ratio, 0.0};
  const auto ds = data::synth_dataset(opt.pieces, opt.seed, opt.out_dir, so);
  out << "synthesized " << ds.manifest.size() << " pieces into " << opt.out_dir << '\n';
  return kSuccess;
}

int status_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return kUsageError;
  if (dynamic_cast<const DataError*>(&e) || dynamic_cast<const ShapeError*>(&e)) return kDataError;
  return kRuntimeFailure;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Musical key classification from audio", "keyscope"};
  app.require_subcommand(1);

  ExtractOptions ex;
  auto* extract = app.add_subcommand("extract", "Compute spectrogram caches for a manifest");
  extract->add_option("--manifest", ex.manifest, "Manifest CSV")->required();
  extract->add_option("--out-dir", ex.out_dir, "Cache directory")->required();
  extract->add_option("--workers", ex.workers, "Worker threads (default: KEYSCOPE_WORKERS or 1)");

  TrainOptions tr;
  auto* train = app.add_subcommand("train", "Train a model on the train/valid splits of a manifest");
  train->add_option("--arch", tr.arch, "keynet or allconv")->capture_default_str();
  train->add_option("--nf", tr.nf, "Feature-map count N_f")->capture_default_str();
  train->add_option("--dropout", tr.dropout, "Dropout probability")->capture_default_str();
  train->add_option("--manifest", tr.manifest, "Manifest CSV")->required();
  train->add_option("--cache-dir", tr.cache_dir, "Spectrogram cache directory (default: manifest directory)");
  train->add_option("--snippet-seconds", tr.snippet_seconds, "Training snippet length")->capture_default_str();
  train->add_option("--seed", tr.seed, "Random seed")->capture_default_str();
  train->add_option("--out", tr.out, "Checkpoint path")->capture_default_str();
  train->add_option("--epochs", tr.epochs, "Maximum epochs")->capture_default_str();
  train->add_option("--batch-size", tr.batch_size, "Batch size")->capture_default_str();
  train->add_option("--patience", tr.patience, "Early-stopping patience in epochs")->capture_default_str();
  train->add_option("--lr", tr.lr, "Initial learning rate")->capture_default_str();
  train->add_flag("--no-augment", tr.no_augment, "Disable pitch-shift augmentation");
  train->add_flag("--verbose", tr.verbose, "Print one line per epoch to standard error");

  PredictOptions pr;
  auto* predict = app.add_subcommand("predict", "Predict the key of a WAV file or spectrogram cache");
  predict->add_option("--model", pr.model, "Checkpoint path")->required();
  predict->add_option("--input", pr.input, "WAV or .kspc file")->required();
  predict->add_option("--format", pr.format, "csv or json")->capture_default_str();

  EvaluateOptions ev;
  auto* evaluate = app.add_subcommand("evaluate", "Score predictions against reference keys");
  evaluate->add_option("--predictions", ev.predictions, "CSV with id,key_label")->required();
  evaluate->add_option("--reference", ev.reference, "CSV with id,key_label")->required();
  evaluate->add_option("--durations", ev.durations, "CSV with id,duration_s for the duration report");
  evaluate->add_option("--duration-out", ev.duration_out, "Duration density CSV output")->capture_default_str();

  SynthOptions sy;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic keyed dataset");
  synth->add_option("--pieces", sy.pieces, "Number of pieces")->capture_default_str();
  synth->add_option("--seed", sy.seed, "Random seed")->capture_default_str();
  synth->add_option("--out-dir", sy.out_dir, "Output directory")->required();
  synth->add_option("--duration", sy.duration, "Seconds per piece")->capture_default_str();
  synth->add_option("--train-ratio", sy.train_ratio, "Share of pieces in the train split")->capture_default_str();
  synth->add_option("--workers", sy.workers, "Worker threads (default: KEYSCOPE_WORKERS or 1)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsageError;
  }

  try {
    if (*extract) return cmd_extract(ex, out, err);
    if (*train) return cmd_train(tr, out, err);
    if (*predict) return cmd_predict(pr, out, err);
    if (*evaluate) return cmd_evaluate(ev, out, err);
    if (*synth) return cmd_synth(sy, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return status_for(e);
  }
  return kUsageError;
}

}  // namespace keyscope::cli
