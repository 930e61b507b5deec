#pragma once

// Posterior binarization, majority-vote fusion of several VAD systems and
// frame-level false-alarm / miss metrics.

#include <cstddef>
#include <span>
#include <vector>

#include "diarkit/core.hpp"

namespace diarkit::vad {

// Thresholds a posterior track, deletes speech runs shorter than `min_on`,
// then fills interior non-speech gaps shorter than `min_off`.
inline std::vector<Segment> binarize(const FrameTrack& track, float onset_thr, double min_on = 0.0,
                                     double min_off = 0.0) {
  if (!(onset_thr >= 0.0f && onset_thr <= 1.0f)) throw ConstraintError("threshold outside [0,1]");
  if (min_on < 0.0 || min_off < 0.0) throw ConstraintError("min_on/min_off must be >= 0");
  check_track(track);

  FrameTrack bin{track.frame_shift, std::vector<float>(track.size())};
  for (std::size_t t = 0; t < track.size(); ++t) bin.values[t] = track.values[t] >= onset_thr ? 1.0f : 0.0f;
  auto runs = derasterize(bin);

  std::erase_if(runs, [&](const Segment& s) { return s.duration() < min_on - kTimeEps; });

  std::vector<Segment> out;
  for (const auto& s : runs) {
    if (!out.empty() && s.onset - out.back().offset < min_off - kTimeEps) {
      out.back().offset = s.offset;
    } else {
      out.push_back(s);
    }
  }
  return out;
}

inline FrameTrack threshold(const FrameTrack& track, float thr) {
  const auto segs = binarize(track, thr);
  return rasterize(segs, track.frame_shift, track.duration());
}

// Frame is speech when at least half of the K systems vote speech.
inline FrameTrack fuse_majority(std::span<const FrameTrack> tracks) {
  if (tracks.empty()) throw ConstraintError("fuse_majority needs at least one track");
  const auto& first = tracks.front();
  for (const auto& t : tracks) {
    if (t.size() != first.size()) throw ConstraintError("VAD tracks differ in length");
    if (t.frame_shift != first.frame_shift) throw ConstraintError("VAD tracks differ in frame shift");
    if (!t.is_binary()) throw ConstraintError("fuse_majority requires binary tracks");
  }
  const std::size_t k = tracks.size();
  FrameTrack out{first.frame_shift, std::vector<float>(first.size(), 0.0f)};
  for (std::size_t f = 0; f < out.size(); ++f) {
    std::size_t votes = 0;
    for (const auto& t : tracks) votes += t.values[f] == 1.0f;
    out.values[f] = 2 * votes >= k ? 1.0f : 0.0f;
  }
  return out;
}

struct VadMetrics {
  double fa_pct = 0.0;
  double miss_pct = 0.0;
  double error_pct = 0.0;
};

// FA and MISS as percentages of all frames; error = FA + MISS.
inline VadMetrics vad_metrics(const FrameTrack& hyp, const FrameTrack& ref) {
  if (hyp.size() != ref.size()) throw ConstraintError("hyp/ref VAD tracks differ in length");
  if (!hyp.is_binary() || !ref.is_binary()) throw ConstraintError("vad_metrics requires binary tracks");
  VadMetrics m;
  if (ref.size() == 0) return m;
  std::size_t fa = 0, miss = 0;
  for (std::size_t f = 0; f < ref.size(); ++f) {
    fa += hyp.values[f] == 1.0f && ref.values[f] == 0.0f;
    miss += hyp.values[f] == 0.0f && ref.values[f] == 1.0f;
  }
  const double total = static_cast<double>(ref.size());
  m.fa_pct = 100.0 * static_cast<double>(fa) / total;
  m.miss_pct = 100.0 * static_cast<double>(miss) / total;
  m.error_pct = m.fa_pct + m.miss_pct;
  return m;
}

}  // namespace diarkit::vad
