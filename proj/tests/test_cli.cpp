#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>
#include <set>
#include <sstream>

#include "cli.hpp"
#include "keyscope/audio/wav.hpp"
#include "keyscope/data/manifest.hpp"
#include "keyscope/models/checkpoint.hpp"
#include "support/published_rows.hpp"
#include "support/temp_dir.hpp"

using namespace keyscope;
using keyscope::testing::TempDir;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_sine(const fs::path& path, double hz, double seconds, int rate = audio::kSampleRate) {
  std::vector<double> s(static_cast<std::size_t>(seconds * rate));
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = 0.4 * std::sin(2 * std::numbers::pi * hz * i / rate);
  audio::save_wav(path, s, 1, rate);
}

std::size_t count_files(const fs::path& dir, const std::string& ext) {
  std::size_t n = 0;
  for (const auto& f : fs::directory_iterator(dir)) n += f.path().extension() == ext;
  return n;
}

// Model whose parameters are all zero, so every class gets probability 1/24.
fs::path uniform_model(const TempDir& dir) {
  models::ArchitectureConfig cfg;
  cfg.kind = models::ArchKind::AllConv;
  cfg.n_feature_maps = 2;
  auto model = models::build_model(cfg);
  for (auto* p : model.parameters()) p->value.set_zero();
  const auto path = dir / "uniform.knet";
  models::save_checkpoint(path, model);
  return path;
}

// Synthetic 48-piece dataset shared by the training tests.
const fs::path& synth_dir() {
  static TempDir dir("keyscope-cli-synth");
  static bool ready = false;
  if (!ready) {
    EXPECT_EQ(run({"synth", "--pieces", "48", "--seed", "3", "--duration", "8", "--out-dir", dir.path().string()}).code,
              0);
    ready = true;
  }
  return dir.path();
}

}  // namespace

TEST(Cli, HelpExitsZeroWithoutSideEffects) {
  TempDir dir;
  for (const char* cmd : {"extract", "train", "predict", "evaluate", "synth"}) {
    const auto r = run({cmd, "--help"});
    EXPECT_EQ(r.code, 0) << cmd;
    EXPECT_NE(r.out.find("Usage"), std::string::npos) << cmd;
  }
  EXPECT_EQ(run({"--help"}).code, 0);
  EXPECT_EQ(run({"synth", "--help", "--out-dir", (dir / "x").string()}).code, 0);
  EXPECT_FALSE(fs::exists(dir / "x"));
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"bogus"}).code, 2);
  EXPECT_EQ(run({"train", "--manifest"}).code, 2);
  EXPECT_EQ(run({"predict", "--model", "m.knet", "--input", "x.wav", "--no-such-flag"}).code, 2);
}

TEST(Cli, SynthIsBalancedAndDeterministic) {
  TempDir a, b;
  ASSERT_EQ(run({"synth", "--pieces", "24", "--seed", "5", "--duration", "3", "--out-dir", a.path().string()}).code, 0);
  ASSERT_EQ(run({"synth", "--pieces", "24", "--seed", "5", "--duration", "3", "--out-dir", b.path().string()}).code, 0);
  const auto manifest = data::load_manifest(a / "manifest.csv");
  std::set<int> keys;
  for (const auto& e : manifest) keys.insert(e.key.index());
  EXPECT_EQ(keys.size(), 24u);
  for (const auto& f : fs::directory_iterator(a.path())) {
    EXPECT_EQ(slurp(f.path()), slurp(b / f.path().filename().string())) << f.path();
  }
}

TEST(Cli, SynthErrors) {
  TempDir dir;
  EXPECT_EQ(run({"synth", "--pieces", "0", "--out-dir", dir.path().string()}).code, 2);
  std::ofstream(dir / "file") << "x";
  EXPECT_EQ(run({"synth", "--pieces", "1", "--duration", "2", "--out-dir", (dir / "file" / "sub").string()}).code, 1);
}

TEST(Cli, ExtractWritesSkipsAndReportsFailures) {
  TempDir dir;
  write_sine(dir / "a.wav", 440, 1.0);
  write_sine(dir / "b.wav", 330, 1.0);
  write_sine(dir / "c.wav", 220, 1.0);
  std::ofstream(dir / "m.csv") << "id,path,key,dataset,split,offset_s,duration_s\n"
                                  "a,a.wav,A major,x,train,0,0\nb,b.wav,E major,x,train,0,0\nc,c.wav,A minor,x,valid,0,0\n";
  const auto caches = dir / "caches";
  auto r = run({"extract", "--manifest", (dir / "m.csv").string(), "--out-dir", caches.string()});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("extracted 3, skipped 0, failed 0"), std::string::npos) << r.out;
  EXPECT_EQ(count_files(caches, ".kspc"), 3u);

  r = run({"extract", "--manifest", (dir / "m.csv").string(), "--out-dir", caches.string(), "--workers", "2"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("skipped 3"), std::string::npos) << r.out;

  write_sine(dir / "c.wav", 220, 1.0, 48000);
  const auto fresh = dir / "fresh";
  r = run({"extract", "--manifest", (dir / "m.csv").string(), "--out-dir", fresh.string()});
  EXPECT_EQ(r.code, 3);
  EXPECT_EQ(count_files(fresh, ".kspc"), 2u);
  EXPECT_NE(r.err.find("failed c"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("resample unsupported"), std::string::npos) << r.err;
}

TEST(Cli, ExtractDataErrors) {
  TempDir dir;
  EXPECT_EQ(run({"extract", "--manifest", (dir / "none.csv").string(), "--out-dir", dir.path().string()}).code, 3);
  std::ofstream(dir / "bad.csv") << "id,path,key,dataset,split,offset_s,duration_s\na,a.wav,H major,x,train,0,0\n";
  EXPECT_EQ(run({"extract", "--manifest", (dir / "bad.csv").string(), "--out-dir", dir.path().string()}).code, 3);
}

TEST(Cli, TrainWritesCheckpointAndDeterministicReports) {
  TempDir out;
  const auto manifest = (synth_dir() / "manifest.csv").string();
  const std::vector<std::string> base = {"train", "--arch", "allconv", "--nf", "4", "--manifest", manifest,
                                         "--snippet-seconds", "4", "--seed", "7", "--epochs", "2", "--batch-size", "8"};
  auto args = base;
  args.insert(args.end(), {"--out", (out / "a" / "model.knet").string()});
  auto r = run(args);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(out / "a" / "model.knet"));
  EXPECT_TRUE(fs::exists(out / "a" / "model.report.csv"));
  EXPECT_TRUE(fs::exists(out / "a" / "model.report.json"));
  EXPECT_NO_THROW(models::load_checkpoint(out / "a" / "model.knet"));

  args = base;
  args.insert(args.end(), {"--out", (out / "b.knet").string()});
  ASSERT_EQ(run(args).code, 0);
  EXPECT_EQ(slurp(out / "a" / "model.report.csv"), slurp(out / "b.report.csv"));
  EXPECT_EQ(slurp(out / "a" / "model.knet"), slurp(out / "b.knet"));
}

TEST(Cli, TrainErrorCodes) {
  TempDir dir;
  const auto manifest = (synth_dir() / "manifest.csv").string();
  EXPECT_EQ(run({"train", "--manifest", manifest, "--dropout", "1.5"}).code, 2);
  EXPECT_EQ(run({"train", "--manifest", manifest, "--arch", "transformer"}).code, 2);
  EXPECT_EQ(run({"train", "--manifest", manifest, "--nf", "0"}).code, 2);
  EXPECT_EQ(run({"train", "--manifest", manifest, "--snippet-seconds", "0"}).code, 2);
  std::ofstream(dir / "m.csv") << "id,path,key,dataset,split,offset_s,duration_s\n"
                                  "a,a.kspc,C major,x,train,0,0\nb,b.kspc,D major,x,valid,0,0\n";
  const auto r = run({"train", "--manifest", (dir / "m.csv").string(), "--out", (dir / "m.knet").string()});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("'a'"), std::string::npos) << r.err;
}

TEST(Cli, PredictUniformModel) {
  TempDir dir;
  const auto model = uniform_model(dir);
  write_sine(dir / "tone.wav", 440, 3.0);
  auto r = run({"predict", "--model", model.string(), "--input", (dir / "tone.wav").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream lines(r.out);
  std::string header, row;
  std::getline(lines, header);
  std::getline(lines, row);
  EXPECT_EQ(header.rfind("id,key_label,class_index,p0,", 0), 0u);
  EXPECT_EQ(row.rfind("tone,", 0), 0u);
  std::size_t count = 0;
  for (std::size_t pos = row.find("0.041667"); pos != std::string::npos; pos = row.find("0.041667", pos + 1)) ++count;
  EXPECT_EQ(count, 24u) << row;

  r = run({"predict", "--model", model.string(), "--input", (dir / "tone.wav").string(), "--format", "json"});
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("\"distribution\""), std::string::npos);
}

TEST(Cli, PredictFromCacheMatchesAudio) {
  TempDir dir;
  ASSERT_EQ(run({"synth", "--pieces", "1", "--seed", "2", "--duration", "10", "--out-dir", dir.path().string()}).code, 0);
  models::ArchitectureConfig cfg;
  cfg.kind = models::ArchKind::AllConv;
  cfg.n_feature_maps = 2;
  models::save_checkpoint(dir / "m.knet", models::build_model(cfg, 4));

  write_sine(dir / "tone.wav", 261.63, 12.0);
  std::ofstream(dir / "m.csv") << "id,path,key,dataset,split,offset_s,duration_s\ntone,tone.wav,C major,x,test,0,0\n";
  ASSERT_EQ(run({"extract", "--manifest", (dir / "m.csv").string(), "--out-dir", (dir / "c").string()}).code, 0);
  const auto from_wav = run({"predict", "--model", (dir / "m.knet").string(), "--input", (dir / "tone.wav").string()});
  const auto from_cache =
      run({"predict", "--model", (dir / "m.knet").string(), "--input", (dir / "c" / "tone.kspc").string()});
  ASSERT_EQ(from_wav.code, 0);
  EXPECT_EQ(from_wav.out, from_cache.out);
}

TEST(Cli, PredictErrorCodes) {
  TempDir dir;
  const auto model = uniform_model(dir);
  write_sine(dir / "short.wav", 440, 0.1);
  auto r = run({"predict", "--model", model.string(), "--input", (dir / "short.wav").string()});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("8192"), std::string::npos) << r.err;

  std::ofstream(dir / "broken.knet") << "KNET garbage";
  write_sine(dir / "tone.wav", 440, 3.0);
  r = run({"predict", "--model", (dir / "broken.knet").string(), "--input", (dir / "tone.wav").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_FALSE(r.err.empty());

  EXPECT_EQ(run({"predict", "--model", model.string(), "--input", (dir / "missing.wav").string()}).code, 3);
  EXPECT_EQ(run({"predict", "--model", model.string(), "--input", (dir / "tone.wav").string(), "--format", "xml"}).code,
            2);
}

TEST(Cli, EvaluatePerfectPredictions) {
  TempDir dir;
  std::ofstream(dir / "ref.csv") << "id,key_label\na,C major\nb,A minor\nc,F# minor\n";
  const auto r = run({"evaluate", "--predictions", (dir / "ref.csv").string(), "--reference", (dir / "ref.csv").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "Weighted,Correct,Fifth,Relative,Parallel,Other,n\n100.0,100.0,0.0,0.0,0.0,0.0,3\n");
}

TEST(Cli, EvaluateReconstructedFixture) {
  TempDir dir;
  // Targets are all C major; predictions realise the category counts.
  const char* by_category[] = {"C major", "G major", "A minor", "C minor", "D major"};
  std::ofstream ref(dir / "ref.csv"), pred(dir / "pred.csv");
  ref << "id,key_label\n";
  pred << "id,key_label\n";
  int id = 0;
  for (std::size_t c = 0; c < 5; ++c) {
    for (std::size_t i = 0; i < keyscope::testing::kGiantStepsCounts[c]; ++i, ++id) {
      ref << "t" << id << ",C major\n";
      pred << "t" << id << ',' << by_category[c] << '\n';
    }
  }
  ref.close();
  pred.close();
  const auto r = run({"evaluate", "--predictions", (dir / "pred.csv").string(), "--reference", (dir / "ref.csv").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream lines(r.out);
  std::string header, row;
  std::getline(lines, header);
  std::getline(lines, row);
  EXPECT_NEAR(std::stod(row.substr(0, row.find(','))), 74.6, 0.15);
  EXPECT_NE(row.find(",67.9,7.0,8.1,4.1,12.9,604"), std::string::npos) << row;
}

TEST(Cli, EvaluateMismatchedIds) {
  TempDir dir;
  std::ofstream(dir / "ref.csv") << "id,key_label\na,C major\nb,A minor\n";
  std::ofstream(dir / "pred.csv") << "id,key_label\nx,C major\ny,A minor\n";
  const auto r = run({"evaluate", "--predictions", (dir / "pred.csv").string(), "--reference", (dir / "ref.csv").string()});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("missing prediction for id a"), std::string::npos) << r.err;
  std::ofstream(dir / "bad.csv") << "id,key_label\na,Q major\nb,A minor\n";
  EXPECT_EQ(run({"evaluate", "--predictions", (dir / "bad.csv").string(), "--reference", (dir / "ref.csv").string()}).code,
            3);
}

TEST(Cli, EvaluateDurationReport) {
  TempDir dir;
  std::ofstream(dir / "ref.csv") << "id,key_label\na,C major\nb,A minor\nc,D major\nd,E minor\n";
  std::ofstream(dir / "pred.csv") << "id,key_label\na,C major\nb,A minor\nc,G major\nd,B minor\n";
  std::ofstream(dir / "dur.csv") << "id,duration_s\na,120\nb,140\nc,40\nd,60\n";
  const auto r = run({"evaluate", "--predictions", (dir / "pred.csv").string(), "--reference",
                      (dir / "ref.csv").string(), "--durations", (dir / "dur.csv").string(), "--duration-out",
                      (dir / "density.csv").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("correct,2,130,"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("incorrect,2,50,"), std::string::npos) << r.out;
  EXPECT_EQ(slurp(dir / "density.csv").rfind("grid,density_correct,density_incorrect\n", 0), 0u);
}
