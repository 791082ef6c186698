#include "keyscope/data/synth.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdio>
#include <numbers>
#include <thread>

#include "keyscope/audio/spectrogram.hpp"
#include "keyscope/audio/spectrogram_cache.hpp"
#include "keyscope/error.hpp"
#include "keyscope/nn/rng.hpp"

namespace keyscope::data {
namespace {

constexpr double kC2 = 65.40639132514966;
constexpr double kC3 = 2.0 * kC2;
constexpr double kMaxPartialHz = 2000.0;
constexpr int kPartials = 4;
constexpr double kFadeSeconds = 0.02;
// The root doubled in octave 4 leads, so each frame has one dominant peak in
// the range where the filterbank resolves semitones.
constexpr double kLeadLevel = 0.35;
constexpr double kBassLevel = 0.12;
constexpr double kChordLevel = 0.06;
constexpr double kPeakLevel = 0.9;

struct Chord {
  int degree;  // semitones above the tonic
  bool minor;
};

// Adds a sum of harmonic partials with a linear fade at both ends.
void add_note(std::vector<double>& out, std::size_t begin, std::size_t end, double f0, double amplitude) {
  const double sr = audio::kSampleRate;
  const auto fade = static_cast<std::size_t>(kFadeSeconds * sr);
  const std::size_t len = end - begin;
  for (int h = 1; h <= kPartials; ++h) {
    const double f = f0 * h;
    if (f >= kMaxPartialHz) break;
    const double a = amplitude * std::pow(0.5, h - 1);
    const std::complex<double> step = std::polar(1.0, 2.0 * std::numbers::pi * f / sr);
    std::complex<double> phasor(1.0, 0.0);
    for (std::size_t i = 0; i < len; ++i) {
      double env = 1.0;
      if (i < fade) env = static_cast<double>(i) / fade;
      if (len - i < fade) env = std::min(env, static_cast<double>(len - i) / fade);
      out[begin + i] += a * env * phasor.imag();
      phasor *= step;
      if ((i & 1023) == 1023) phasor /= std::abs(phasor);
    }
  }
}

}  // namespace

audio::AudioClip synthesize_piece(const eval::KeyLabel& key, std::uint64_t seed, double duration_s) {
  if (!(duration_s > 0.0)) throw ConfigError("synthetic duration must be positive");
  const bool minor = key.mode == eval::KeyMode::Minor;
  const std::array<Chord, 4> progression = {Chord{0, minor}, Chord{5, minor}, Chord{7, minor}, Chord{0, minor}};

  nn::RngStream rng(seed);
  audio::AudioClip clip;
  const auto n = static_cast<std::size_t>(std::llround(duration_s * audio::kSampleRate));
  clip.samples.assign(n, 0.0);
  const std::size_t segment = n / progression.size();

  for (std::size_t c = 0; c < progression.size(); ++c) {
    const Chord& chord = progression[c];
    const std::size_t begin = c * segment;
    const std::size_t end = c + 1 == progression.size() ? n : begin + segment;
    const int root = key.tonic + chord.degree;
    const std::array<int, 3> triad = {root, root + (chord.minor ? 3 : 4), root + 7};

    const auto detune = [&rng]() { return std::exp2(rng.uniform(-8.0, 8.0) / 1200.0); };
    const auto jitter = [&rng]() { return rng.uniform(0.8, 1.2); };

    // Draws are sequenced explicitly so the stream order does not depend on argument evaluation.
    double f = kC2 * std::exp2(root / 12.0) * detune();
    add_note(clip.samples, begin, end, f, kBassLevel * jitter());
    for (int octave = 0; octave < 2; ++octave) {
      for (int tone : triad) {
        f = kC3 * std::exp2(octave) * std::exp2(tone / 12.0) * detune();
        const double level = octave == 1 && tone == root ? kLeadLevel : kChordLevel;
        add_note(clip.samples, begin, end, f, level * jitter());
      }
    }
  }
  for (double& s : clip.samples) s += 0.003 * rng.normal();
  double peak = 0.0;
  for (double s : clip.samples) peak = std::max(peak, std::abs(s));
  if (peak > kPeakLevel) {
    for (double& s : clip.samples) s *= kPeakLevel / peak;
  }
  return clip;
}

std::vector<SynthItem> plan_synth_dataset(int n_pieces, std::uint64_t seed) {
  if (n_pieces < 1) throw ConfigError("synthetic dataset needs at least one piece");
  std::vector<SynthItem> items;
  for (int i = 0; i < n_pieces; ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "synth_%04d", i);
    items.push_back({id, eval::KeyLabel::from_index(i % eval::kNumKeys), nn::derive_seed(seed, static_cast<std::uint64_t>(i))});
  }
  return items;
}

SynthDataset synth_dataset(int n_pieces, std::uint64_t seed, const std::filesystem::path& out_dir,
                           const SynthOptions& options) {
  const auto plan = plan_synth_dataset(n_pieces, seed);
  if (!out_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec || !std::filesystem::is_directory(out_dir)) throw Error("cannot create output directory: " + out_dir.string());
  }
  const audio::FilterBank fb = audio::build_filterbank();
  const audio::CacheMetadata meta{0, audio::frontend_hash(fb.config)};

  SynthDataset ds;
  ds.pieces.resize(plan.size());
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(plan.size());
  const auto worker = [&]() {
    for (std::size_t i = next++; i < plan.size(); i = next++) {
      try {
        const auto clip = synthesize_piece(plan[i].key, plan[i].seed, options.duration_s);
        ds.pieces[i] = {plan[i].id, audio::compute_spectrogram(clip, fb), plan[i].key};
        if (!out_dir.empty()) audio::save_spectrogram(out_dir / (plan[i].id + ".kspc"), ds.pieces[i].spec, meta);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int workers = std::max(1, options.workers);
  std::vector<std::thread> threads;
  for (int w = 1; w < workers; ++w) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  for (const auto& item : plan) {
    ManifestEntry e;
    e.id = item.id;
    e.feature_path = item.id + ".kspc";
    e.key = item.key;
    e.key_text = eval::format_key_label(item.key);
    e.dataset = options.dataset;
    ds.manifest.push_back(std::move(e));
  }
  ds.manifest = assign_splits(std::move(ds.manifest), options.split_ratios, seed);
  if (!out_dir.empty()) save_manifest(out_dir / "manifest.csv", ds.manifest);
  return ds;
}

}  // namespace keyscope::data
