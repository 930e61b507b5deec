#pragma once

// Synthetic data: label-pattern-driven conversation sampling plus embedding
// and posterior oracles standing in for the neural front ends.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "diarkit/cluster.hpp"
#include "diarkit/core.hpp"

namespace diarkit::simulate {

inline constexpr double kCentroidMaxCos = 0.2;

namespace detail {

inline double snap(double t, double grid) { return std::round(t / grid) * grid; }
inline double clean(double t) { return std::round(t * 1e6) / 1e6; }

inline std::string ref_name(std::size_t i) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "ref%02zu", i);
  return buf;
}

}  // namespace detail

struct ConversationParams {
  double min_turn = 1.5;
  double max_turn = 8.0;
  double overlap_prob = 0.15;
  double max_overlap = 1.5;
  double pause_prob = 0.3;
  double max_pause = 1.5;
  double grid = 0.01;  // boundaries snap to this grid
};

// Turn-taking pattern with random pauses and short overlaps, used to seed
// the pattern pool. Every boundary lies on `params.grid`.
inline Diarization generate_conversation(int n_speakers, double duration, std::uint64_t seed,
                                         const ConversationParams& params = {},
                                         std::string recording_id = "pattern") {
  if (n_speakers < 1) throw ConstraintError("need at least one speaker");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> pick(0, n_speakers - 1);
  std::map<std::string, std::vector<Segment>> supports;
  int spk = pick(rng);
  double t = 0.0;
  while (t < duration) {
    const double len = params.min_turn + unit(rng) * (params.max_turn - params.min_turn);
    const double end = std::min(duration, detail::snap(t + len, params.grid));
    if (end - t > kTimeEps) supports[detail::ref_name(static_cast<std::size_t>(spk))].push_back({t, end});
    if (n_speakers > 1) {
      int next = pick(rng);
      while (next == spk) next = pick(rng);
      spk = next;
    }
    const double u = unit(rng);
    double next_t = end;
    if (n_speakers > 1 && u < params.overlap_prob) {
      next_t = end - std::min(0.3 + unit(rng) * (params.max_overlap - 0.3), 0.5 * len);
    } else if (u < params.overlap_prob + params.pause_prob) {
      next_t = end + 0.2 + unit(rng) * (params.max_pause - 0.2);
    }
    t = std::max(0.0, detail::snap(next_t, params.grid));
    if (end >= duration) break;
  }
  return from_supports(std::move(recording_id), supports);
}

// Samples a pattern and a window of `duration` seconds from its speech-only
// (silence removed) label track, with speakers renamed ref00, ref01, ... in
// order of first appearance. Overlaps inside the window are preserved.
inline Diarization simulate_labels(std::span<const Diarization> patterns, double duration, std::uint64_t seed,
                                   std::string recording_id = "sim") {
  if (patterns.empty()) throw ConstraintError("empty pattern pool");
  if (!(duration > 0.0)) throw ConstraintError("duration must be positive");
  std::vector<std::size_t> eligible;
  std::vector<CompactTimeline> timelines;
  for (std::size_t i = 0; i < patterns.size(); ++i) {
    timelines.emplace_back(speech_support(patterns[i]));
    if (timelines.back().total() >= duration - kTimeEps) eligible.push_back(i);
  }
  if (eligible.empty()) throw ConstraintError("duration exceeds every pattern's speech length");

  std::mt19937_64 rng(seed);
  const std::size_t p = eligible[std::uniform_int_distribution<std::size_t>(0, eligible.size() - 1)(rng)];
  const auto& timeline = timelines[p];
  const double slack = std::max(0.0, timeline.total() - duration);
  double onset = std::uniform_real_distribution<double>(0.0, 1.0)(rng) * slack;
  onset = std::clamp(detail::snap(onset, 0.01), 0.0, slack);
  const Segment window{onset, onset + duration};

  std::vector<std::pair<double, std::string>> first_seen;
  std::map<std::string, std::vector<Segment>> pieces;
  for (const auto& [spk, segs] : speaker_supports(patterns[p])) {
    std::vector<Segment> compact;
    for (const auto& s : segs) {
      for (const auto& c : timeline.to_compact(s)) compact.push_back(c);
    }
    for (const auto& c : intersect(timeline_support(compact), std::span<const Segment>(&window, 1))) {
      const Segment shifted{detail::clean(c.onset - onset), detail::clean(c.offset - onset)};
      if (shifted.duration() > kTimeEps) pieces[spk].push_back(shifted);
    }
    if (!pieces[spk].empty()) first_seen.emplace_back(pieces[spk].front().onset, spk);
  }
  std::sort(first_seen.begin(), first_seen.end());
  std::map<std::string, std::vector<Segment>> renamed;
  for (std::size_t i = 0; i < first_seen.size(); ++i) renamed[detail::ref_name(i)] = pieces[first_seen[i].second];
  return from_supports(std::move(recording_id), renamed);
}

// Unit vectors drawn uniformly on the sphere, redrawn until every pairwise
// cosine is at most `max_cos`.
inline std::vector<std::vector<float>> draw_centroids(std::size_t count, std::size_t dim, double max_cos,
                                                      std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<std::vector<double>> units;
  auto draw = [&]() {
    std::vector<double> v(dim);
    double norm = 0.0;
    do {
      norm = 0.0;
      for (auto& x : v) {
        x = gauss(rng);
        norm += x * x;
      }
    } while (norm == 0.0);
    norm = std::sqrt(norm);
    for (auto& x : v) x /= norm;
    return v;
  };
  for (std::size_t i = 0; i < count; ++i) {
    for (int attempt = 0;; ++attempt) {
      if (attempt > 100000) throw ConstraintError("cannot place centroids under the cosine cap");
      auto v = draw();
      const bool ok = std::all_of(units.begin(), units.end(), [&](const auto& u) {
        double c = 0.0;
        for (std::size_t d = 0; d < dim; ++d) c += u[d] * v[d];
        return c <= max_cos;
      });
      if (ok) {
        units.push_back(std::move(v));
        break;
      }
    }
  }
  std::vector<std::vector<float>> out;
  for (const auto& u : units) out.emplace_back(u.begin(), u.end());
  return out;
}

struct SimulatedEmbeddings {
  EmbeddingSequence sequence;
  std::map<std::string, std::vector<float>> centroids;
};

// One embedding per uniform segment of every single-speaker region: the
// speaker's centroid plus isotropic Gaussian noise sized so that the expected
// cosine to the centroid is about `within_cos`, renormalized.
inline SimulatedEmbeddings simulate_embeddings_with_centroids(const Diarization& diar, std::size_t dim,
                                                              double within_cos, std::uint64_t seed,
                                                              double window = 1.28, double shift = 0.32) {
  if (dim == 0) throw ConstraintError("dim must be positive");
  if (!(within_cos > 0.0 && within_cos <= 1.0)) throw ConstraintError("within_cos must lie in (0,1]");
  std::mt19937_64 rng(seed);
  const auto spks = speakers(diar);
  const auto cents = draw_centroids(spks.size(), dim, kCentroidMaxCos, rng);
  SimulatedEmbeddings out;
  for (std::size_t i = 0; i < spks.size(); ++i) out.centroids[spks[i]] = cents[i];

  // |c + sigma g|^2 ~ 1 + sigma^2 dim, so cos ~ 1 / sqrt(1 + sigma^2 dim).
  const double sigma = std::sqrt((1.0 / (within_cos * within_cos) - 1.0) / static_cast<double>(dim));
  std::normal_distribution<double> gauss(0.0, 1.0);
  out.sequence.dim = dim;
  for (const auto& turn : single_speaker_regions(diar)) {
    const auto& c = out.centroids.at(turn.speaker);
    for (const auto& seg : cluster::uniform_segments(std::span<const Segment>(&turn.segment, 1), window, shift)) {
      std::vector<double> v(dim);
      double norm = 0.0;
      for (std::size_t d = 0; d < dim; ++d) {
        v[d] = c[d] + (sigma > 0.0 ? sigma * gauss(rng) : 0.0);
        norm += v[d] * v[d];
      }
      norm = std::sqrt(norm);
      std::vector<float> f(dim);
      for (std::size_t d = 0; d < dim; ++d) f[d] = static_cast<float>(sigma > 0.0 ? v[d] / norm : c[d]);
      out.sequence.records.push_back({seg, std::move(f)});
    }
  }
  std::stable_sort(out.sequence.records.begin(), out.sequence.records.end(),
                   [](const auto& a, const auto& b) { return a.segment.onset < b.segment.onset; });
  return out;
}

inline EmbeddingSequence simulate_embeddings(const Diarization& diar, std::size_t dim, double within_cos,
                                             std::uint64_t seed, double window = 1.28, double shift = 0.32) {
  return simulate_embeddings_with_centroids(diar, dim, within_cos, seed, window, shift).sequence;
}

// Per-slot posteriors on the compact timeline: 1 - noise where the slot's
// speaker is active, noise elsewhere; padding slots are all zero.
inline std::vector<FrameTrack> simulate_tsvad_posteriors(const Diarization& diar,
                                                         std::span<const std::optional<std::string>> slot_speakers,
                                                         double noise, double frame_shift,
                                                         const CompactTimeline& timeline) {
  if (!(noise >= 0.0 && noise <= 1.0)) throw ConstraintError("noise must lie in [0,1]");
  const auto supports = speaker_supports(diar);
  const std::size_t n = frame_count(timeline.total(), frame_shift);
  const auto hi = static_cast<float>(std::clamp(1.0 - noise, 0.0, 1.0));
  const auto lo = static_cast<float>(std::clamp(noise, 0.0, 1.0));
  std::vector<FrameTrack> out;
  for (const auto& slot : slot_speakers) {
    FrameTrack track{frame_shift, std::vector<float>(n, 0.0f)};
    if (slot) {
      std::vector<Segment> compact;
      if (auto it = supports.find(*slot); it != supports.end()) {
        for (const auto& s : it->second) {
          for (const auto& c : timeline.to_compact(s)) compact.push_back(c);
        }
      }
      const auto active = rasterize(timeline_support(compact), frame_shift, timeline.total());
      for (std::size_t f = 0; f < n; ++f) track.values[f] = active.values[f] == 1.0f ? hi : lo;
    }
    out.push_back(std::move(track));
  }
  return out;
}

// Overlap-detector posterior over the original timeline.
inline FrameTrack simulate_overlap_posterior(const Diarization& diar, double noise, double frame_shift,
                                             double duration) {
  if (!(noise >= 0.0 && noise <= 1.0)) throw ConstraintError("noise must lie in [0,1]");
  auto track = rasterize(overlap_regions(diar), frame_shift, duration);
  for (auto& v : track.values) v = static_cast<float>(v == 1.0f ? 1.0 - noise : noise);
  return track;
}

}  // namespace diarkit::simulate
