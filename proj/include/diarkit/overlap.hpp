#pragma once

// Overlap handling on top of a clustering result: overlap-detector label
// assignment and target-speaker VAD slot bookkeeping, decoding and merging.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "diarkit/core.hpp"

namespace diarkit::overlap {

struct TsVadConfig {
  int n_slots = 8;
  double chunk = 16.0;       // seconds
  double min_enroll = 16.0;  // seconds of speech needed for a slot
  float decision_thr = 0.5f;
  float overlap_thr = 0.85f;

  void validate() const {
    if (n_slots < 1) throw ConstraintError("n_slots must be >= 1");
    if (!(chunk > 0.0)) throw ConstraintError("chunk must be positive");
    if (!(decision_thr >= 0.0f && decision_thr <= 1.0f) || !(overlap_thr >= 0.0f && overlap_thr <= 1.0f)) {
      throw ConstraintError("TS-VAD thresholds must lie in [0,1]");
    }
  }
};

namespace detail {

inline double gap_to(const Segment& a, const Segment& b) {
  if (a.offset <= b.onset) return b.onset - a.offset;
  if (b.offset <= a.onset) return a.onset - b.offset;
  return 0.0;
}

inline std::vector<std::pair<std::string, double>> durations_desc(const Diarization& d) {
  std::vector<std::pair<std::string, double>> out;
  for (const auto& [spk, segs] : speaker_supports(d)) out.emplace_back(spk, total_duration(segs));
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  return out;
}

}  // namespace detail

// For every detected overlap region, marks two speakers active over it: the
// speaker with the most activity inside the region and the other speaker
// whose closest turn is nearest in time. Recordings with a single speaker
// are left unchanged.
inline Diarization assign_overlap_two_nearest(const Diarization& base, std::span<const Segment> overlaps) {
  auto supports = speaker_supports(base);
  if (supports.size() < 2) return normalized(base);
  const auto original = supports;

  for (const auto& region : timeline_support(overlaps)) {
    std::string first;
    double best_inside = 0.0;
    for (const auto& [spk, segs] : original) {
      const double inside = intersection_duration(segs, std::span<const Segment>(&region, 1));
      if (inside > best_inside + kTimeEps) {
        best_inside = inside;
        first = spk;
      }
    }
    auto nearest = [&](const std::string& exclude) {
      std::string who;
      double best = std::numeric_limits<double>::infinity();
      for (const auto& [spk, segs] : original) {
        if (spk == exclude) continue;
        for (const auto& s : segs) {
          const double g = detail::gap_to(s, region);
          if (g < best - kTimeEps) {
            best = g;
            who = spk;
          }
        }
      }
      return who;
    };
    if (first.empty()) first = nearest("");
    const std::string second = nearest(first);
    if (second.empty()) continue;
    supports[first].push_back(region);
    supports[second].push_back(region);
  }
  return from_supports(base.recording_id, supports);
}

struct Slot {
  std::optional<std::string> speaker;  // empty for zero-vector padding
  std::vector<float> embedding;
};

struct TargetSelection {
  std::vector<Slot> slots;
  std::vector<std::string> kept_aside;  // speakers whose base turns pass through

  std::vector<std::optional<std::string>> slot_speakers() const {
    std::vector<std::optional<std::string>> out;
    for (const auto& s : slots) out.push_back(s.speaker);
    return out;
  }
};

// Speakers with at least min_enroll seconds fill slots longest first (ties by
// label); free slots get zero vectors; the rest are kept aside.
inline TargetSelection select_targets(const Diarization& base,
                                      const std::map<std::string, std::vector<float>>& embeddings,
                                      const TsVadConfig& cfg) {
  cfg.validate();
  std::size_t dim = embeddings.empty() ? 0 : embeddings.begin()->second.size();
  TargetSelection out;
  for (const auto& [spk, dur] : detail::durations_desc(base)) {
    const bool eligible = dur >= cfg.min_enroll - kTimeEps;
    if (eligible && out.slots.size() < static_cast<std::size_t>(cfg.n_slots)) {
      std::vector<float> emb(dim, 0.0f);
      if (!embeddings.empty()) {
        auto it = embeddings.find(spk);
        if (it == embeddings.end()) throw ConstraintError("no embedding for speaker " + spk);
        if (it->second.size() != dim) throw ConstraintError("embedding dimension mismatch");
        emb = it->second;
      }
      out.slots.push_back({spk, std::move(emb)});
    } else {
      out.kept_aside.push_back(spk);
    }
  }
  while (out.slots.size() < static_cast<std::size_t>(cfg.n_slots)) {
    out.slots.push_back({std::nullopt, std::vector<float>(dim, 0.0f)});
  }
  std::sort(out.kept_aside.begin(), out.kept_aside.end());
  return out;
}

// Thresholds per-slot posteriors laid out on the compact (speech-only)
// timeline, decodes each chunk independently and maps activity back to
// original time.
inline Diarization tsvad_decode(std::span<const FrameTrack> posteriors,
                                std::span<const std::optional<std::string>> slot_speakers,
                                const TsVadConfig& cfg, const CompactTimeline& timeline,
                                std::string recording_id) {
  cfg.validate();
  if (posteriors.size() != slot_speakers.size()) {
    throw ConstraintError("got " + std::to_string(posteriors.size()) + " posterior tracks for " +
                          std::to_string(slot_speakers.size()) + " slots");
  }
  std::map<std::string, std::vector<Segment>> supports;
  if (posteriors.empty()) return Diarization{std::move(recording_id), {}};
  const double shift = posteriors.front().frame_shift;
  const std::size_t n_frames = posteriors.front().size();
  for (const auto& p : posteriors) {
    check_track(p);
    if (p.size() != n_frames || p.frame_shift != shift) {
      throw ConstraintError("posterior tracks differ in length or frame shift");
    }
  }
  const auto chunk_frames = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(cfg.chunk / shift)));
  for (std::size_t s = 0; s < posteriors.size(); ++s) {
    if (!slot_speakers[s]) continue;
    auto& out = supports[*slot_speakers[s]];
    for (std::size_t c0 = 0; c0 < n_frames; c0 += chunk_frames) {
      const std::size_t c1 = std::min(n_frames, c0 + chunk_frames);
      std::size_t t = c0;
      while (t < c1) {
        if (posteriors[s].values[t] < cfg.decision_thr) { ++t; continue; }
        std::size_t e = t;
        while (e < c1 && posteriors[s].values[e] >= cfg.decision_thr) ++e;
        const Segment compact{static_cast<double>(t) * shift, static_cast<double>(e) * shift};
        for (const auto& seg : timeline.to_original(compact)) out.push_back(seg);
        t = e;
      }
    }
  }
  std::erase_if(supports, [](const auto& kv) { return kv.second.empty(); });
  return from_supports(std::move(recording_id), supports);
}

inline std::vector<Turn> turns_of(const Diarization& d, std::span<const std::string> speakers) {
  std::vector<Turn> out;
  for (const auto& t : d.turns) {
    if (std::find(speakers.begin(), speakers.end(), t.speaker) != speakers.end()) out.push_back(t);
  }
  return out;
}

// TS-VAD output replaces slotted speakers; kept-aside turns are appended as-is.
inline Diarization merge_full(const Diarization& tsvad, std::span<const Turn> kept_aside) {
  Diarization out = tsvad;
  out.turns.insert(out.turns.end(), kept_aside.begin(), kept_aside.end());
  sort_turns(out.turns);
  return out;
}

// Adds TS-VAD speakers to `base` only on frames where TS-VAD reports two or
// more active speakers. Nothing in `base` is removed.
inline Diarization merge_partial(const Diarization& base, const Diarization& tsvad,
                                 double frame_shift = kDefaultFrameShift) {
  const double end = std::max(end_time(base), end_time(tsvad));
  const auto base_sup = speaker_supports(base);
  const auto ts_sup = speaker_supports(tsvad);
  const auto ts_overlap = rasterize(overlap_regions(tsvad), frame_shift, end);

  std::map<std::string, std::vector<Segment>> out = base_sup;
  for (const auto& [spk, segs] : ts_sup) {
    const auto ts_frames = rasterize(segs, frame_shift, end);
    FrameTrack base_frames{frame_shift, std::vector<float>(ts_frames.size(), 0.0f)};
    if (auto it = base_sup.find(spk); it != base_sup.end()) base_frames = rasterize(it->second, frame_shift, end);
    FrameTrack add{frame_shift, std::vector<float>(ts_frames.size(), 0.0f)};
    for (std::size_t f = 0; f < add.size(); ++f) {
      if (ts_overlap.values[f] == 1.0f && ts_frames.values[f] == 1.0f && base_frames.values[f] == 0.0f) {
        add.values[f] = 1.0f;
      }
    }
    for (const auto& s : derasterize(add)) out[spk].push_back(s);
  }
  return from_supports(base.recording_id, out);
}

}  // namespace diarkit::overlap
