#pragma once

// Domain types and timeline algebra shared by every pipeline stage.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "diarkit/error.hpp"

namespace diarkit {

inline constexpr double kTimeEps = 1e-9;
inline constexpr double kDefaultFrameShift = 0.01;

struct Segment {
  double onset = 0.0;
  double offset = 0.0;

  double duration() const { return offset - onset; }
  bool operator==(const Segment&) const = default;
};

inline bool is_valid(const Segment& s) {
  return std::isfinite(s.onset) && std::isfinite(s.offset) && s.onset >= 0.0 &&
         s.offset > s.onset;
}

inline void check_segment(const Segment& s) {
  if (!is_valid(s)) {
    throw ConstraintError("invalid segment [" + std::to_string(s.onset) + ", " +
                          std::to_string(s.offset) + ")");
  }
}

struct Turn {
  Segment segment;
  std::string speaker;

  bool operator==(const Turn&) const = default;
};

struct Diarization {
  std::string recording_id;
  std::vector<Turn> turns;

  bool operator==(const Diarization&) const = default;
};

struct FrameTrack {
  double frame_shift = kDefaultFrameShift;
  std::vector<float> values;

  std::size_t size() const { return values.size(); }
  double duration() const { return static_cast<double>(values.size()) * frame_shift; }
  bool is_binary() const {
    return std::all_of(values.begin(), values.end(),
                       [](float v) { return v == 0.0f || v == 1.0f; });
  }
  bool operator==(const FrameTrack&) const = default;
};

inline void check_track(const FrameTrack& t) {
  if (!(t.frame_shift > 0.0) || !std::isfinite(t.frame_shift)) {
    throw ConstraintError("frame_shift must be positive");
  }
  for (float v : t.values) {
    if (!(v >= 0.0f && v <= 1.0f)) throw ConstraintError("frame value outside [0,1]");
  }
}

struct EmbeddingRecord {
  Segment segment;
  std::vector<float> vector;

  bool operator==(const EmbeddingRecord&) const = default;
};

struct EmbeddingSequence {
  std::size_t dim = 0;
  std::vector<EmbeddingRecord> records;

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }
  bool operator==(const EmbeddingSequence&) const = default;
};

inline void check_embeddings(const EmbeddingSequence& e) {
  for (const auto& r : e.records) {
    check_segment(r.segment);
    if (r.vector.size() != e.dim) throw ConstraintError("embedding dimension mismatch");
    for (float v : r.vector) {
      if (!std::isfinite(v)) throw ConstraintError("non-finite embedding component");
    }
  }
}

// ---------------------------------------------------------------------------
// Timeline algebra

inline double total_duration(std::span<const Segment> segs) {
  double d = 0.0;
  for (const auto& s : segs) d += s.duration();
  return d;
}

// Minimal sorted list of disjoint segments covering the same time as `segs`.
// Touching segments are merged.
inline std::vector<Segment> timeline_support(std::span<const Segment> segs) {
  std::vector<Segment> sorted(segs.begin(), segs.end());
  for (const auto& s : sorted) check_segment(s);
  std::sort(sorted.begin(), sorted.end(), [](const Segment& a, const Segment& b) {
    return std::tie(a.onset, a.offset) < std::tie(b.onset, b.offset);
  });
  std::vector<Segment> out;
  for (const auto& s : sorted) {
    if (!out.empty() && s.onset <= out.back().offset + kTimeEps) {
      out.back().offset = std::max(out.back().offset, s.offset);
    } else {
      out.push_back(s);
    }
  }
  return out;
}

// Intersection of two supports (both sorted and disjoint).
inline std::vector<Segment> intersect(std::span<const Segment> a, std::span<const Segment> b) {
  std::vector<Segment> out;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const double lo = std::max(a[i].onset, b[j].onset);
    const double hi = std::min(a[i].offset, b[j].offset);
    if (hi - lo > kTimeEps) out.push_back({lo, hi});
    if (a[i].offset < b[j].offset) ++i; else ++j;
  }
  return out;
}

// True when t lies in [onset, offset) of some segment of a sorted support.
inline bool covers(std::span<const Segment> support, double t) {
  auto it = std::upper_bound(support.begin(), support.end(), t,
                             [](double x, const Segment& s) { return x < s.onset; });
  if (it == support.begin()) return false;
  --it;
  return t < it->offset;
}

inline double intersection_duration(std::span<const Segment> a, std::span<const Segment> b) {
  return total_duration(intersect(a, b));
}

// Complement of a support within `span`.
inline std::vector<Segment> complement(std::span<const Segment> support, Segment span) {
  std::vector<Segment> out;
  double cursor = span.onset;
  for (const auto& s : support) {
    if (s.offset <= cursor) continue;
    if (s.onset >= span.offset) break;
    if (s.onset - cursor > kTimeEps) out.push_back({cursor, s.onset});
    cursor = std::max(cursor, s.offset);
  }
  if (span.offset - cursor > kTimeEps) out.push_back({cursor, span.offset});
  return out;
}

// a \ b for supports.
inline std::vector<Segment> subtract(std::span<const Segment> a, std::span<const Segment> b) {
  if (a.empty()) return {};
  const Segment span{a.front().onset, a.back().offset};
  const auto inv = complement(b, span);
  return intersect(a, inv);
}

inline std::size_t frame_count(double duration, double frame_shift) {
  if (duration <= 0.0) return 0;
  return static_cast<std::size_t>(std::ceil(duration / frame_shift - kTimeEps));
}

// Frame t is set when its center (t + 0.5) * shift falls inside a segment.
// A center landing exactly on an offset (within kTimeEps) counts as inside.
inline FrameTrack rasterize(std::span<const Segment> segs, double frame_shift, double duration) {
  if (!(frame_shift > 0.0)) throw ConstraintError("frame_shift must be positive");
  if (duration < 0.0) throw ConstraintError("duration must be non-negative");
  FrameTrack track{frame_shift, std::vector<float>(frame_count(duration, frame_shift), 0.0f)};
  const auto n = static_cast<long long>(track.values.size());
  for (const auto& s : segs) {
    check_segment(s);
    // First and last frame whose center is inside [onset - eps, offset + eps].
    long long first = static_cast<long long>(std::ceil((s.onset - kTimeEps) / frame_shift - 0.5));
    long long last = static_cast<long long>(std::floor((s.offset + kTimeEps) / frame_shift - 0.5));
    first = std::max(first, 0LL);
    last = std::min(last, n - 1);
    for (long long t = first; t <= last; ++t) track.values[static_cast<std::size_t>(t)] = 1.0f;
  }
  return track;
}

// Maximal runs of ones become [i * shift, (j + 1) * shift).
inline std::vector<Segment> derasterize(const FrameTrack& track) {
  if (!track.is_binary()) throw ConstraintError("derasterize requires a binary track");
  std::vector<Segment> out;
  const std::size_t n = track.values.size();
  std::size_t t = 0;
  while (t < n) {
    if (track.values[t] == 0.0f) { ++t; continue; }
    std::size_t end = t;
    while (end < n && track.values[end] == 1.0f) ++end;
    out.push_back({static_cast<double>(t) * track.frame_shift,
                   static_cast<double>(end) * track.frame_shift});
    t = end;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Diarization helpers

inline std::vector<std::string> speakers(const Diarization& d) {
  std::vector<std::string> out;
  for (const auto& t : d.turns) out.push_back(t.speaker);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

inline std::map<std::string, std::vector<Segment>> speaker_supports(const Diarization& d) {
  std::map<std::string, std::vector<Segment>> raw;
  for (const auto& t : d.turns) raw[t.speaker].push_back(t.segment);
  for (auto& [spk, segs] : raw) segs = timeline_support(segs);
  return raw;
}

inline std::vector<Segment> speech_support(const Diarization& d) {
  std::vector<Segment> segs;
  segs.reserve(d.turns.size());
  for (const auto& t : d.turns) segs.push_back(t.segment);
  return timeline_support(segs);
}

inline double end_time(const Diarization& d) {
  double end = 0.0;
  for (const auto& t : d.turns) end = std::max(end, t.segment.offset);
  return end;
}

inline void sort_turns(std::vector<Turn>& turns) {
  std::sort(turns.begin(), turns.end(), [](const Turn& a, const Turn& b) {
    return std::tie(a.segment.onset, a.speaker, a.segment.offset) <
           std::tie(b.segment.onset, b.speaker, b.segment.offset);
  });
}

// Canonical form: each speaker's turns merged into a disjoint support,
// turns sorted by (onset, speaker).
inline Diarization normalized(const Diarization& d) {
  Diarization out{d.recording_id, {}};
  for (const auto& [spk, segs] : speaker_supports(d)) {
    for (const auto& s : segs) out.turns.push_back({s, spk});
  }
  sort_turns(out.turns);
  return out;
}

inline Diarization from_supports(std::string recording_id,
                                 const std::map<std::string, std::vector<Segment>>& supports) {
  Diarization out{std::move(recording_id), {}};
  for (const auto& [spk, segs] : supports) {
    for (const auto& s : timeline_support(segs)) out.turns.push_back({s, spk});
  }
  sort_turns(out.turns);
  return out;
}

// Throws unless turns are valid, sorted by onset, and no speaker overlaps itself.
inline void validate(const Diarization& d) {
  std::map<std::string, std::vector<Segment>> by_spk;
  for (std::size_t i = 0; i < d.turns.size(); ++i) {
    check_segment(d.turns[i].segment);
    if (i > 0 && d.turns[i].segment.onset < d.turns[i - 1].segment.onset) {
      throw ConstraintError("turns not sorted by onset");
    }
    by_spk[d.turns[i].speaker].push_back(d.turns[i].segment);
  }
  for (auto& [spk, segs] : by_spk) {
    for (std::size_t i = 1; i < segs.size(); ++i) {
      if (segs[i].onset < segs[i - 1].offset - kTimeEps) {
        throw ConstraintError("speaker " + spk + " overlaps itself");
      }
    }
  }
}

// Time where at least `min_active` distinct speakers are simultaneously active.
inline std::vector<Segment> active_at_least(const Diarization& d, int min_active) {
  std::vector<std::pair<double, int>> events;
  for (const auto& [spk, segs] : speaker_supports(d)) {
    for (const auto& s : segs) {
      events.emplace_back(s.onset, +1);
      events.emplace_back(s.offset, -1);
    }
  }
  // Offsets sort before onsets at equal times so touching turns do not count.
  std::sort(events.begin(), events.end());
  std::vector<Segment> out;
  int active = 0;
  double start = 0.0;
  for (const auto& [t, delta] : events) {
    const int before = active;
    active += delta;
    if (before < min_active && active >= min_active) start = t;
    if (before >= min_active && active < min_active && t - start > kTimeEps) {
      out.push_back({start, t});
    }
  }
  return timeline_support(out);
}

inline std::vector<Segment> overlap_regions(const Diarization& d) { return active_at_least(d, 2); }

// Time where exactly one speaker is active, labelled with that speaker.
inline std::vector<Turn> single_speaker_regions(const Diarization& d) {
  const auto supports = speaker_supports(d);
  const auto overlaps = overlap_regions(d);
  std::vector<Turn> out;
  for (const auto& [spk, segs] : supports) {
    for (const auto& s : subtract(segs, overlaps)) out.push_back({s, spk});
  }
  sort_turns(out);
  return out;
}

// ---------------------------------------------------------------------------
// Concatenation of speech regions into a contiguous "compact" timeline, as
// produced when non-speech is cut out before chunked processing.

class CompactTimeline {
 public:
  CompactTimeline() = default;
  explicit CompactTimeline(std::span<const Segment> speech) : regions_(timeline_support(speech)) {
    starts_.reserve(regions_.size());
    double cum = 0.0;
    for (const auto& r : regions_) {
      starts_.push_back(cum);
      cum += r.duration();
    }
    total_ = cum;
  }

  static CompactTimeline identity(double duration) {
    if (duration <= 0.0) return CompactTimeline{};
    const Segment whole{0.0, duration};
    return CompactTimeline(std::span<const Segment>(&whole, 1));
  }

  double total() const { return total_; }
  const std::vector<Segment>& regions() const { return regions_; }

  std::vector<Segment> to_original(Segment compact) const {
    std::vector<Segment> out;
    for (std::size_t k = 0; k < regions_.size(); ++k) {
      const double c0 = starts_[k];
      const double c1 = c0 + regions_[k].duration();
      const double lo = std::max(compact.onset, c0);
      const double hi = std::min(compact.offset, c1);
      if (hi - lo > kTimeEps) {
        out.push_back({regions_[k].onset + (lo - c0), regions_[k].onset + (hi - c0)});
      }
    }
    return out;
  }

  std::vector<Segment> to_compact(Segment original) const {
    std::vector<Segment> out;
    for (std::size_t k = 0; k < regions_.size(); ++k) {
      const double lo = std::max(original.onset, regions_[k].onset);
      const double hi = std::min(original.offset, regions_[k].offset);
      if (hi - lo > kTimeEps) {
        const double c = starts_[k] - regions_[k].onset;
        out.push_back({lo + c, hi + c});
      }
    }
    return timeline_support(out);
  }

 private:
  std::vector<Segment> regions_;
  std::vector<double> starts_;
  double total_ = 0.0;
};

}  // namespace diarkit
