#pragma once

// Overlap-aware fusion of several diarization systems (DOVER-Lap style):
// labels are aligned to a shared namespace, then every elementary region is
// decided by a weighted vote on the speaker count and on the speakers.

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "diarkit/core.hpp"
#include "diarkit/hungarian.hpp"

namespace diarkit::fusion {

inline constexpr double kDefaultRankExponent = 0.5;

struct LabelMapping {
  std::vector<Diarization> systems;  // relabeled into the shared namespace
  std::vector<std::string> order;    // namespace labels in creation order
};

namespace detail {

// Speakers of one system ordered by first onset, then label.
inline std::vector<std::pair<std::string, std::vector<Segment>>> ordered_speakers(const Diarization& d) {
  std::vector<std::pair<std::string, std::vector<Segment>>> out;
  for (auto& [spk, segs] : speaker_supports(d)) out.emplace_back(spk, std::move(segs));
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.second.front().onset < b.second.front().onset;
  });
  return out;
}

inline Diarization relabel(const Diarization& d, const std::map<std::string, std::string>& names) {
  Diarization out{d.recording_id, {}};
  for (const auto& t : d.turns) out.turns.push_back({t.segment, names.at(t.speaker)});
  sort_turns(out.turns);
  return out;
}

}  // namespace detail

// The first system is the anchor and names the namespace. Each following
// system is matched against everything mapped so far by a maximum-overlap
// one-to-one assignment; speakers without positive overlap get fresh labels.
inline LabelMapping map_labels(std::span<const Diarization> systems) {
  LabelMapping out;
  if (systems.empty()) return out;
  for (const auto& s : systems) {
    if (s.recording_id != systems.front().recording_id) throw ConstraintError("systems differ in recording");
  }

  // Per namespace label, the supports it received from each mapped system.
  std::vector<std::vector<std::vector<Segment>>> mass;
  std::map<std::string, std::size_t> index;
  auto add_label = [&](const std::string& name) {
    index[name] = out.order.size();
    out.order.push_back(name);
    mass.emplace_back();
  };
  std::size_t fresh = 0;
  auto fresh_label = [&]() {
    std::string name;
    do {
      name = "fused" + std::to_string(fresh++);
    } while (index.count(name));
    return name;
  };

  const auto anchor = detail::ordered_speakers(systems.front());
  std::map<std::string, std::string> names;
  for (const auto& [spk, segs] : anchor) {
    add_label(spk);
    mass.back().push_back(segs);
    names[spk] = spk;
  }
  out.systems.push_back(detail::relabel(systems.front(), names));

  for (std::size_t s = 1; s < systems.size(); ++s) {
    const auto spks = detail::ordered_speakers(systems[s]);
    std::vector<std::vector<double>> overlap(out.order.size(), std::vector<double>(spks.size(), 0.0));
    for (std::size_t l = 0; l < out.order.size(); ++l) {
      for (std::size_t c = 0; c < spks.size(); ++c) {
        for (const auto& segs : mass[l]) overlap[l][c] += intersection_duration(segs, spks[c].second);
      }
    }
    const auto assignment = max_weight_assignment(overlap);
    std::vector<int> col_to_row(spks.size(), -1);
    for (std::size_t l = 0; l < assignment.size(); ++l) {
      const int c = assignment[l];
      if (c >= 0 && overlap[l][static_cast<std::size_t>(c)] > 0.0) col_to_row[static_cast<std::size_t>(c)] = static_cast<int>(l);
    }
    names.clear();
    for (std::size_t c = 0; c < spks.size(); ++c) {
      std::size_t row;
      if (col_to_row[c] >= 0) {
        row = static_cast<std::size_t>(col_to_row[c]);
      } else {
        add_label(fresh_label());
        row = out.order.size() - 1;
      }
      names[spks[c].first] = out.order[row];
      mass[row].push_back(spks[c].second);
    }
    out.systems.push_back(detail::relabel(systems[s], names));
  }
  return out;
}

// (1/k)^exponent for rank k = 1..n, normalized to sum 1.
inline std::vector<double> rank_weights(std::size_t n, double exponent = kDefaultRankExponent) {
  std::vector<double> w(n);
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    w[k] = std::pow(1.0 / static_cast<double>(k + 1), exponent);
    sum += w[k];
  }
  for (auto& x : w) x /= sum;
  return w;
}

// Weighted voting over elementary regions of already-mapped systems. The
// region's speaker count is the weighted mean of the systems' counts rounded
// half up; the highest-scoring speakers fill it. Score ties go to the label
// appearing first in `label_order`, or lexicographically when it is empty.
inline Diarization doverlap_fuse(std::span<const Diarization> systems, std::span<const double> weights,
                                 std::span<const std::string> label_order = {}) {
  if (systems.empty()) throw ConstraintError("nothing to fuse");
  if (weights.size() != systems.size()) throw ConstraintError("weight count does not match system count");
  double wsum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ConstraintError("weights must be non-negative");
    wsum += w;
  }
  if (!(wsum > 0.0)) throw ConstraintError("weights sum to zero");
  std::vector<double> w(weights.begin(), weights.end());
  for (auto& x : w) x /= wsum;

  std::map<std::string, std::size_t> rank;
  for (std::size_t i = 0; i < label_order.size(); ++i) rank.emplace(label_order[i], i);
  auto precedes = [&](const std::string& a, const std::string& b) {
    auto ia = rank.find(a), ib = rank.find(b);
    if (ia != rank.end() && ib != rank.end()) return ia->second < ib->second;
    if (ia != rank.end() || ib != rank.end()) return ia != rank.end();
    return a < b;
  };

  std::vector<std::map<std::string, std::vector<Segment>>> sup;
  std::vector<double> cuts;
  for (const auto& s : systems) {
    if (s.recording_id != systems.front().recording_id) throw ConstraintError("systems differ in recording");
    sup.push_back(speaker_supports(s));
    for (const auto& t : s.turns) {
      cuts.push_back(t.segment.onset);
      cuts.push_back(t.segment.offset);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::map<std::string, std::vector<Segment>> fused;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const Segment region{cuts[i], cuts[i + 1]};
    if (region.duration() <= kTimeEps) continue;
    const double mid = 0.5 * (region.onset + region.offset);
    double mean_count = 0.0;
    std::map<std::string, double> score;
    for (std::size_t s = 0; s < systems.size(); ++s) {
      int count = 0;
      for (const auto& [spk, segs] : sup[s]) {
        if (!covers(segs, mid)) continue;
        ++count;
        score[spk] += w[s];
      }
      mean_count += w[s] * count;
    }
    const auto target = static_cast<std::size_t>(std::floor(mean_count + 0.5 + 1e-9));
    if (target == 0) continue;
    std::vector<std::pair<std::string, double>> ranked(score.begin(), score.end());
    std::sort(ranked.begin(), ranked.end(), [&](const auto& a, const auto& b) {
      if (std::abs(a.second - b.second) > 1e-12) return a.second > b.second;
      return precedes(a.first, b.first);
    });
    for (std::size_t k = 0; k < std::min(target, ranked.size()); ++k) fused[ranked[k].first].push_back(region);
  }
  return from_supports(systems.front().recording_id, fused);
}

// map_labels followed by doverlap_fuse. Empty `weights` selects rank weights
// in input order.
inline Diarization fuse(std::span<const Diarization> systems, std::span<const double> weights = {},
                        double rank_exponent = kDefaultRankExponent) {
  const auto mapping = map_labels(systems);
  std::vector<double> w(weights.begin(), weights.end());
  if (w.empty()) w = rank_weights(systems.size(), rank_exponent);
  return doverlap_fuse(mapping.systems, w, mapping.order);
}

}  // namespace diarkit::fusion
