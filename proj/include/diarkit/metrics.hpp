#pragma once

// Diarization error rate and Jaccard error rate with an optimal one-to-one
// speaker mapping. The interval scorer sweeps every boundary exactly; the
// frame scorer exists as an independent cross-check.

#include <algorithm>
#include <cstddef>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "diarkit/core.hpp"
#include "diarkit/hungarian.hpp"

namespace diarkit::metrics {

inline constexpr double kDefaultCollar = 0.25;

struct DerReport {
  // Seconds.
  double scored_speech = 0.0;  // total scored reference speaker-time
  double false_alarm = 0.0;
  double missed = 0.0;
  double confusion = 0.0;
  // Jaccard accumulators: sum of per-speaker errors and number of speakers.
  double jaccard_sum = 0.0;
  std::size_t jaccard_speakers = 0;

  // Percentages.
  double fa_pct = 0.0;
  double miss_pct = 0.0;
  double confusion_pct = 0.0;
  double der_pct = 0.0;
  double jer_pct = 0.0;

  std::map<std::string, std::string> mapping;  // ref speaker -> hyp speaker

  void finalize() {
    auto pct = [&](double x) {
      if (scored_speech > 0.0) return x / scored_speech * 100.0;
      return x > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    };
    fa_pct = pct(false_alarm);
    miss_pct = pct(missed);
    confusion_pct = pct(confusion);
    der_pct = pct(false_alarm + missed + confusion);
    jer_pct = jaccard_speakers > 0 ? 100.0 * jaccard_sum / static_cast<double>(jaccard_speakers) : 0.0;
  }
};

// Time-weighted aggregate across recordings. Mappings are not carried over.
inline DerReport combine(std::span<const DerReport> reports) {
  DerReport out;
  for (const auto& r : reports) {
    out.scored_speech += r.scored_speech;
    out.false_alarm += r.false_alarm;
    out.missed += r.missed;
    out.confusion += r.confusion;
    out.jaccard_sum += r.jaccard_sum;
    out.jaccard_speakers += r.jaccard_speakers;
  }
  out.finalize();
  return out;
}

// Maximum total-overlap one-to-one mapping; row i maps to result[i] or -1.
// Zero-weight pairings are dropped.
inline std::vector<int> optimal_mapping(const std::vector<std::vector<double>>& overlap) {
  auto assignment = max_weight_assignment(overlap);
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    if (assignment[i] >= 0 && !(overlap[i][static_cast<std::size_t>(assignment[i])] > 0.0)) {
      assignment[i] = -1;
    }
  }
  return assignment;
}

namespace detail {

struct Labelled {
  std::vector<std::string> names;
  std::vector<std::vector<Segment>> supports;
};

inline Labelled labelled(const Diarization& d) {
  Labelled out;
  for (auto& [spk, segs] : speaker_supports(d)) {
    out.names.push_back(spk);
    out.supports.push_back(std::move(segs));
  }
  return out;
}

}  // namespace detail

// Scored region: everything up to the last boundary of either side, minus
// +-collar around each reference speaker boundary and, when overlaps are not
// scored, minus reference overlap regions.
inline std::vector<Segment> scoring_region(const Diarization& ref, double end, double collar,
                                           bool score_overlap) {
  if (collar < 0.0) throw ConstraintError("collar must be non-negative");
  std::vector<Segment> excluded;
  if (collar > 0.0) {
    for (const auto& [spk, segs] : speaker_supports(ref)) {
      for (const auto& s : segs) {
        for (double b : {s.onset, s.offset}) excluded.push_back({std::max(0.0, b - collar), b + collar});
      }
    }
  }
  if (!score_overlap) {
    for (const auto& s : overlap_regions(ref)) excluded.push_back(s);
  }
  excluded = timeline_support(excluded);
  if (end <= 0.0) return {};
  return complement(excluded, {0.0, end});
}

// Per-reference-speaker Jaccard error within `region`; unmapped speakers
// score 1. Returns {sum of errors, number of scored speakers}.
inline std::pair<double, std::size_t> jaccard_terms(const Diarization& ref, const Diarization& hyp,
                                                    const std::map<std::string, std::string>& mapping,
                                                    std::span<const Segment> region) {
  const auto ref_sup = speaker_supports(ref);
  const auto hyp_sup = speaker_supports(hyp);
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& [spk, segs] : ref_sup) {
    const auto r = intersect(segs, region);
    const double r_dur = total_duration(r);
    if (r_dur <= kTimeEps) continue;
    ++count;
    auto m = mapping.find(spk);
    if (m == mapping.end()) {
      sum += 1.0;
      continue;
    }
    const auto h = intersect(hyp_sup.at(m->second), region);
    const double inter = intersection_duration(r, h);
    const double uni = r_dur + total_duration(h) - inter;
    sum += 1.0 - inter / uni;
  }
  return {sum, count};
}

// JER over the whole timeline (no collar).
inline double jer(const Diarization& ref, const Diarization& hyp,
                  const std::map<std::string, std::string>& mapping) {
  const double end = std::max(end_time(ref), end_time(hyp));
  const Segment whole{0.0, end};
  std::span<const Segment> region;
  if (end > 0.0) region = std::span<const Segment>(&whole, 1);
  const auto [sum, count] = jaccard_terms(ref, hyp, mapping, region);
  return count > 0 ? 100.0 * sum / static_cast<double>(count) : 0.0;
}

inline DerReport der(const Diarization& ref, const Diarization& hyp, double collar = kDefaultCollar,
                     bool score_overlap = true) {
  if (ref.recording_id != hyp.recording_id) {
    throw ConstraintError("recording mismatch: " + ref.recording_id + " vs " + hyp.recording_id);
  }
  const auto R = detail::labelled(ref);
  const auto H = detail::labelled(hyp);
  const double end = std::max(end_time(ref), end_time(hyp));
  const auto region = scoring_region(ref, end, collar, score_overlap);

  std::vector<double> cuts;
  for (const auto* side : {&R, &H}) {
    for (const auto& segs : side->supports) {
      for (const auto& s : segs) {
        cuts.push_back(s.onset);
        cuts.push_back(s.offset);
      }
    }
  }
  for (const auto& s : region) {
    cuts.push_back(s.onset);
    cuts.push_back(s.offset);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  struct Piece {
    double dur;
    std::vector<int> ref, hyp;
  };
  std::vector<Piece> pieces;
  std::vector<std::vector<double>> overlap(R.names.size(), std::vector<double>(H.names.size(), 0.0));
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double dur = cuts[i + 1] - cuts[i];
    if (dur <= 0.0) continue;
    const double mid = 0.5 * (cuts[i] + cuts[i + 1]);
    if (!covers(region, mid)) continue;
    Piece p{dur, {}, {}};
    for (std::size_t r = 0; r < R.supports.size(); ++r) {
      if (covers(R.supports[r], mid)) p.ref.push_back(static_cast<int>(r));
    }
    for (std::size_t h = 0; h < H.supports.size(); ++h) {
      if (covers(H.supports[h], mid)) p.hyp.push_back(static_cast<int>(h));
    }
    if (p.ref.empty() && p.hyp.empty()) continue;
    for (int r : p.ref) {
      for (int h : p.hyp) overlap[static_cast<std::size_t>(r)][static_cast<std::size_t>(h)] += dur;
    }
    pieces.push_back(std::move(p));
  }

  const auto assignment = optimal_mapping(overlap);
  DerReport rep;
  for (std::size_t r = 0; r < assignment.size(); ++r) {
    if (assignment[r] >= 0) rep.mapping[R.names[r]] = H.names[static_cast<std::size_t>(assignment[r])];
  }

  for (const auto& p : pieces) {
    const auto n_ref = static_cast<double>(p.ref.size());
    const auto n_hyp = static_cast<double>(p.hyp.size());
    double correct = 0.0;
    for (int r : p.ref) {
      const int h = assignment[static_cast<std::size_t>(r)];
      if (h >= 0 && std::find(p.hyp.begin(), p.hyp.end(), h) != p.hyp.end()) correct += 1.0;
    }
    rep.scored_speech += p.dur * n_ref;
    rep.missed += p.dur * std::max(0.0, n_ref - n_hyp);
    rep.false_alarm += p.dur * std::max(0.0, n_hyp - n_ref);
    rep.confusion += p.dur * (std::min(n_ref, n_hyp) - correct);
  }
  std::tie(rep.jaccard_sum, rep.jaccard_speakers) = jaccard_terms(ref, hyp, rep.mapping, region);
  rep.finalize();
  return rep;
}

// DER terms on a frame grid (no JER). Quantization error shrinks with the shift.
inline DerReport der_framewise(const Diarization& ref, const Diarization& hyp,
                               double collar = kDefaultCollar, bool score_overlap = true,
                               double frame_shift = kDefaultFrameShift) {
  if (ref.recording_id != hyp.recording_id) throw ConstraintError("recording mismatch");
  const auto R = detail::labelled(ref);
  const auto H = detail::labelled(hyp);
  const double end = std::max(end_time(ref), end_time(hyp));
  const auto region = scoring_region(ref, end, collar, score_overlap);
  const auto mask = rasterize(region, frame_shift, end);
  const std::size_t n = mask.size();
  auto raster = [&](const detail::Labelled& side) {
    std::vector<FrameTrack> out;
    for (const auto& s : side.supports) out.push_back(rasterize(s, frame_shift, end));
    return out;
  };
  const auto rt = raster(R), ht = raster(H);

  std::vector<std::vector<double>> overlap(R.names.size(), std::vector<double>(H.names.size(), 0.0));
  for (std::size_t f = 0; f < n; ++f) {
    if (mask.values[f] == 0.0f) continue;
    for (std::size_t r = 0; r < rt.size(); ++r) {
      if (rt[r].values[f] == 0.0f) continue;
      for (std::size_t h = 0; h < ht.size(); ++h) overlap[r][h] += ht[h].values[f];
    }
  }
  const auto assignment = optimal_mapping(overlap);
  DerReport rep;
  for (std::size_t r = 0; r < assignment.size(); ++r) {
    if (assignment[r] >= 0) rep.mapping[R.names[r]] = H.names[static_cast<std::size_t>(assignment[r])];
  }
  for (std::size_t f = 0; f < n; ++f) {
    if (mask.values[f] == 0.0f) continue;
    double n_ref = 0.0, n_hyp = 0.0, correct = 0.0;
    for (std::size_t r = 0; r < rt.size(); ++r) {
      if (rt[r].values[f] == 0.0f) continue;
      n_ref += 1.0;
      const int h = assignment[r];
      if (h >= 0 && ht[static_cast<std::size_t>(h)].values[f] == 1.0f) correct += 1.0;
    }
    for (const auto& t : ht) n_hyp += t.values[f];
    rep.scored_speech += frame_shift * n_ref;
    rep.missed += frame_shift * std::max(0.0, n_ref - n_hyp);
    rep.false_alarm += frame_shift * std::max(0.0, n_hyp - n_ref);
    rep.confusion += frame_shift * (std::min(n_ref, n_hyp) - correct);
  }
  rep.finalize();
  return rep;
}

}  // namespace diarkit::metrics
