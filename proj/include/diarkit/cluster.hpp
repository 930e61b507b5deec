#pragma once

// Clustering-based diarization: uniform segmentation, consecutive-segment
// merging, average-linkage AHC with long/short cluster reassignment, and
// spectral clustering over a pluggable affinity provider.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "diarkit/core.hpp"

namespace diarkit::cluster {

enum class Linkage { Average, Single, Complete };

struct AhcParams {
  double segment_thr = 0.54;
  double stop_thr = 0.6;
  double long_min = 6.0;  // seconds
  double speaker_thr = 0.2;
  double window = 1.28;
  double shift = 0.32;
  Linkage linkage = Linkage::Average;

  void validate() const {
    for (double t : {segment_thr, stop_thr, speaker_thr}) {
      if (!(t >= -1.0 && t <= 1.0)) throw ConstraintError("AHC thresholds must lie in [-1,1]");
    }
    if (!(shift > 0.0) || window < shift) throw ConstraintError("need window >= shift > 0");
    if (long_min < 0.0) throw ConstraintError("long_min must be >= 0");
  }
};

inline constexpr double kScShift = 0.64;
inline constexpr int kDefaultMaxSpeakers = 20;
inline constexpr std::size_t kDefaultContext = 64;
inline constexpr double kDefaultPrune = 0.1;

// ---------------------------------------------------------------------------
// Segmentation

// Windows of length `window` every `shift` seconds inside each speech region.
// A tail left uncovered by the last full window gets one extra window
// right-aligned to the region end. Regions no longer than `window` are
// emitted whole.
inline std::vector<Segment> uniform_segments(std::span<const Segment> speech, double window,
                                             double shift) {
  if (!(shift > 0.0) || window < shift) throw ConstraintError("need window >= shift > 0");
  std::vector<Segment> out;
  for (const auto& region : timeline_support(speech)) {
    if (region.duration() <= window + kTimeEps) {
      out.push_back(region);
      continue;
    }
    double last_start = region.onset;
    for (std::size_t k = 0;; ++k) {
      const double start = region.onset + static_cast<double>(k) * shift;
      if (start + window > region.offset + kTimeEps) break;
      out.push_back({start, std::min(start + window, region.offset)});
      last_start = start;
    }
    if (region.offset - (last_start + window) > kTimeEps) {
      out.push_back({region.offset - window, region.offset});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Cosine geometry

namespace detail {

inline std::vector<double> unit(std::span<const float> v) {
  double norm = 0.0;
  for (float x : v) norm += static_cast<double>(x) * x;
  norm = std::sqrt(norm);
  if (!(norm > 0.0)) throw ConstraintError("zero-norm embedding");
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] / norm;
  return out;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Raw cosine matrix of a set of unit vectors, unit diagonal, clamped to [-1,1].
inline Eigen::MatrixXd cosine_matrix(const std::vector<std::vector<double>>& units) {
  const auto n = static_cast<Eigen::Index>(units.size());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    m(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double c = std::clamp(dot(units[static_cast<std::size_t>(i)], units[static_cast<std::size_t>(j)]), -1.0, 1.0);
      m(i, j) = c;
      m(j, i) = c;
    }
  }
  return m;
}

inline std::vector<double> mean_unit(const std::vector<const std::vector<float>*>& members,
                                     const std::vector<double>& weights) {
  std::vector<double> acc(members.front()->size(), 0.0);
  for (std::size_t m = 0; m < members.size(); ++m) {
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += weights[m] * (*members[m])[i];
  }
  std::vector<float> f(acc.begin(), acc.end());
  return unit(f);
}

}  // namespace detail

inline double cosine_similarity(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) throw ConstraintError("embedding dimension mismatch");
  return std::clamp(detail::dot(detail::unit(a), detail::unit(b)), -1.0, 1.0);
}

// Raw cosine (thresholds are stated on this scale) and the same values mapped
// to [0,1] as (cos + 1) / 2.
struct CosineAffinity {
  Eigen::MatrixXd raw;
  Eigen::MatrixXd mapped;
};

inline CosineAffinity cosine_affinity(const EmbeddingSequence& embs) {
  std::vector<std::vector<double>> units;
  units.reserve(embs.size());
  for (const auto& r : embs.records) units.push_back(detail::unit(r.vector));
  CosineAffinity out;
  out.raw = detail::cosine_matrix(units);
  out.mapped = (out.raw.array() + 1.0) / 2.0;
  return out;
}

// ---------------------------------------------------------------------------
// Segment merging

// Greedy left-to-right merge of temporally contiguous records while the
// running group's length-weighted mean stays within `segment_thr` cosine of
// the next record. Merged records span the union of their times and carry
// the renormalized weighted mean; unmerged records pass through untouched.
inline EmbeddingSequence merge_consecutive(const EmbeddingSequence& embs, double segment_thr) {
  EmbeddingSequence out{embs.dim, {}};
  std::size_t i = 0;
  const auto& recs = embs.records;
  while (i < recs.size()) {
    std::vector<double> acc(embs.dim, 0.0);
    auto add = [&](const EmbeddingRecord& r) {
      const double w = r.segment.duration();
      for (std::size_t d = 0; d < acc.size(); ++d) acc[d] += w * r.vector[d];
    };
    add(recs[i]);
    Segment span = recs[i].segment;
    std::size_t j = i + 1;
    while (j < recs.size() && recs[j].segment.onset <= span.offset + kTimeEps) {
      const std::vector<float> mean(acc.begin(), acc.end());
      if (cosine_similarity(mean, recs[j].vector) < segment_thr) break;
      add(recs[j]);
      span.offset = std::max(span.offset, recs[j].segment.offset);
      ++j;
    }
    if (j == i + 1) {
      out.records.push_back(recs[i]);
    } else {
      const auto u = detail::unit(std::vector<float>(acc.begin(), acc.end()));
      out.records.push_back({span, std::vector<float>(u.begin(), u.end())});
    }
    i = j;
  }
  return out;
}

// ---------------------------------------------------------------------------
// AHC

// Relabels so that clusters are numbered 0.. in order of first appearance.
inline std::vector<int> canonical_labels(std::span<const int> labels) {
  std::map<int, int> remap;
  std::vector<int> out;
  out.reserve(labels.size());
  for (int l : labels) {
    auto [it, inserted] = remap.emplace(l, static_cast<int>(remap.size()));
    out.push_back(it->second);
  }
  return out;
}

// Agglomerates while the best linkage similarity is >= stop_thr. Ties are
// broken towards the lexicographically lowest (i, j) pair.
inline std::vector<int> ahc(const Eigen::MatrixXd& similarity, double stop_thr,
                            Linkage linkage = Linkage::Average) {
  const auto n = static_cast<std::size_t>(similarity.rows());
  if (n == 0) throw ConstraintError("ahc on an empty matrix");
  if (similarity.cols() != similarity.rows()) throw ConstraintError("ahc needs a square matrix");

  Eigen::MatrixXd sim = similarity;
  std::vector<char> active(n, 1);
  std::vector<double> size(n, 1.0);
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  constexpr double kNone = -std::numeric_limits<double>::infinity();
  std::vector<std::size_t> best(n, n);
  std::vector<double> best_val(n, kNone);

  auto refresh = [&](std::size_t i) {
    best[i] = n;
    best_val[i] = kNone;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (active[j] && sim(i, j) > best_val[i]) {
        best_val[i] = sim(i, j);
        best[i] = j;
      }
    }
  };
  for (std::size_t i = 0; i < n; ++i) refresh(i);

  for (;;) {
    std::size_t bi = n;
    double bv = kNone;
    for (std::size_t i = 0; i < n; ++i) {
      if (active[i] && best[i] < n && best_val[i] > bv) {
        bv = best_val[i];
        bi = i;
      }
    }
    if (bi == n || bv < stop_thr) break;
    const std::size_t a = bi, b = best[bi];

    for (std::size_t k = 0; k < n; ++k) {
      if (!active[k] || k == a || k == b) continue;
      double v = 0.0;
      switch (linkage) {
        case Linkage::Average:
          v = (size[a] * sim(a, k) + size[b] * sim(b, k)) / (size[a] + size[b]);
          break;
        case Linkage::Single:
          v = std::max(sim(a, k), sim(b, k));
          break;
        case Linkage::Complete:
          v = std::min(sim(a, k), sim(b, k));
          break;
      }
      sim(a, k) = v;
      sim(k, a) = v;
    }
    active[b] = 0;
    size[a] += size[b];
    parent[b] = static_cast<int>(a);

    refresh(a);
    for (std::size_t k = 0; k < a; ++k) {
      if (!active[k]) continue;
      if (best[k] == a || best[k] == b) {
        refresh(k);
      } else if (sim(k, a) > best_val[k] || (sim(k, a) == best_val[k] && a < best[k])) {
        best_val[k] = sim(k, a);
        best[k] = a;
      }
    }
    for (std::size_t k = a + 1; k < b; ++k) {
      if (active[k] && best[k] == b) refresh(k);
    }
  }

  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    int r = static_cast<int>(i);
    while (parent[static_cast<std::size_t>(r)] != r) r = parent[static_cast<std::size_t>(r)];
    labels[i] = r;
  }
  return canonical_labels(labels);
}

// Clusters whose covered duration reaches long_min are "long". Each short
// cluster joins the long cluster with the most similar centroid when that
// cosine reaches speaker_thr, and otherwise stays a speaker of its own.
inline std::vector<int> reassign_short_clusters(std::span<const int> labels,
                                                const EmbeddingSequence& embs,
                                                const AhcParams& params) {
  if (labels.size() != embs.size()) throw ConstraintError("labels/embeddings size mismatch");
  std::map<int, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < labels.size(); ++i) members[labels[i]].push_back(i);

  struct Info {
    bool is_long = false;
    std::vector<double> centroid;
  };
  std::map<int, Info> info;
  for (const auto& [label, idx] : members) {
    std::vector<Segment> segs;
    std::vector<const std::vector<float>*> vecs;
    for (auto i : idx) {
      segs.push_back(embs.records[i].segment);
      vecs.push_back(&embs.records[i].vector);
    }
    Info inf;
    inf.is_long = total_duration(timeline_support(segs)) >= params.long_min - kTimeEps;
    inf.centroid = detail::mean_unit(vecs, std::vector<double>(vecs.size(), 1.0));
    info[label] = std::move(inf);
  }

  std::vector<int> out(labels.begin(), labels.end());
  const bool any_long = std::any_of(info.begin(), info.end(), [](const auto& kv) { return kv.second.is_long; });
  if (!any_long) return canonical_labels(out);

  std::map<int, int> target;
  for (const auto& [label, inf] : info) {
    if (inf.is_long) continue;
    int best_label = -1;
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& [other, oinf] : info) {
      if (!oinf.is_long) continue;
      const double c = detail::dot(inf.centroid, oinf.centroid);
      if (c > best) {
        best = c;
        best_label = other;
      }
    }
    if (best >= params.speaker_thr) target[label] = best_label;
  }
  for (auto& l : out) {
    if (auto it = target.find(l); it != target.end()) l = it->second;
  }
  return canonical_labels(out);
}

inline std::string speaker_name(int label) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "spk%02d", label);
  return buf;
}

// Converts per-record labels into a diarization. Where consecutive records
// overlap in time, the boundary is placed at the midpoint of the overlap.
inline Diarization labels_to_diarization(const EmbeddingSequence& embs, std::span<const int> labels,
                                         std::string recording_id) {
  if (labels.size() != embs.size()) throw ConstraintError("labels/embeddings size mismatch");
  std::vector<std::size_t> order(embs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return embs.records[a].segment.onset < embs.records[b].segment.onset;
  });
  std::map<std::string, std::vector<Segment>> supports;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto& seg = embs.records[order[k]].segment;
    double start = seg.onset, end = seg.offset;
    if (k > 0) {
      const auto& prev = embs.records[order[k - 1]].segment;
      if (prev.offset > seg.onset) start = std::max(start, 0.5 * (seg.onset + prev.offset));
    }
    if (k + 1 < order.size()) {
      const auto& next = embs.records[order[k + 1]].segment;
      if (next.onset < seg.offset) end = std::min(end, 0.5 * (next.onset + seg.offset));
    }
    if (end - start > kTimeEps) supports[speaker_name(labels[order[k]])].push_back({start, end});
  }
  return from_supports(std::move(recording_id), supports);
}

// Full AHC recipe on uniform-segment embeddings.
inline Diarization diarize_ahc(const EmbeddingSequence& embs, const AhcParams& params,
                               std::string recording_id) {
  params.validate();
  if (embs.empty()) return Diarization{std::move(recording_id), {}};
  const auto merged = merge_consecutive(embs, params.segment_thr);
  const auto affinity = cosine_affinity(merged);
  const auto labels = ahc(affinity.raw, params.stop_thr, params.linkage);
  const auto final_labels = reassign_short_clusters(labels, merged, params);
  return labels_to_diarization(merged, final_labels, std::move(recording_id));
}

// ---------------------------------------------------------------------------
// Affinity providers

// Scores one context window of embeddings (rows of `window`). Row i of the
// result holds the scores of the pairs (x_i, x_1) ... (x_i, x_m).
class AffinityProvider {
 public:
  virtual ~AffinityProvider() = default;
  virtual std::string id() const = 0;
  virtual Eigen::MatrixXd score_window(const std::vector<std::vector<float>>& window) const = 0;
};

// Baseline provider: cosine similarity mapped to [0,1].
class CosineAffinityProvider final : public AffinityProvider {
 public:
  std::string id() const override { return "cosine"; }
  Eigen::MatrixXd score_window(const std::vector<std::vector<float>>& window) const override {
    std::vector<std::vector<double>> units;
    units.reserve(window.size());
    for (const auto& v : window) units.push_back(detail::unit(v));
    return (detail::cosine_matrix(units).array() + 1.0) / 2.0;
  }
};

// Assembles the full affinity matrix from provider windows of at most
// `context` embeddings. Short sequences are scored in one window. Longer
// ones are cut into blocks of context/2 and every pair of blocks is scored
// together, so each pair of segments is seen at least once; entries scored
// several times are averaged.
inline Eigen::MatrixXd affinity_rows(const EmbeddingSequence& embs, const AffinityProvider& provider,
                                     std::size_t context = kDefaultContext) {
  if (context < 2) throw ConstraintError("affinity context must be >= 2");
  const std::size_t n = embs.size();
  auto score = [&](const std::vector<std::size_t>& idx) {
    std::vector<std::vector<float>> window;
    window.reserve(idx.size());
    for (auto i : idx) window.push_back(embs.records[i].vector);
    Eigen::MatrixXd w = provider.score_window(window);
    if (w.rows() != static_cast<Eigen::Index>(idx.size()) || w.cols() != w.rows()) {
      throw ConstraintError("affinity provider " + provider.id() + " returned a wrongly sized block");
    }
    return w;
  };

  if (n <= context) {
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), 0);
    return n == 0 ? Eigen::MatrixXd(0, 0) : score(all);
  }

  const std::size_t block = context / 2;
  const std::size_t n_blocks = (n + block - 1) / block;
  Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  Eigen::MatrixXi count = Eigen::MatrixXi::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t a = 0; a < n_blocks; ++a) {
    for (std::size_t b = a + 1; b < n_blocks; ++b) {
      std::vector<std::size_t> idx;
      for (std::size_t i = a * block; i < std::min(n, (a + 1) * block); ++i) idx.push_back(i);
      for (std::size_t i = b * block; i < std::min(n, (b + 1) * block); ++i) idx.push_back(i);
      const auto w = score(idx);
      for (std::size_t p = 0; p < idx.size(); ++p) {
        for (std::size_t q = 0; q < idx.size(); ++q) {
          const auto gi = static_cast<Eigen::Index>(idx[p]), gj = static_cast<Eigen::Index>(idx[q]);
          const int c = ++count(gi, gj);
          // Running mean stays exact when every visit sees the same value.
          mean(gi, gj) += (w(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)) - mean(gi, gj)) / c;
        }
      }
    }
  }
  return mean;
}

// ---------------------------------------------------------------------------
// Spectral clustering

namespace detail {

// Lloyd iterations from k-means++ seeds; best of `restarts` by inertia.
inline std::vector<int> kmeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed, int restarts) {
  const Eigen::Index n = points.rows();
  std::vector<int> best_labels(static_cast<std::size_t>(n), 0);
  if (k <= 1 || n == 0) return best_labels;
  double best_inertia = std::numeric_limits<double>::infinity();

  for (int run = 0; run < restarts; ++run) {
    std::mt19937_64 rng(seed + static_cast<std::uint64_t>(run));
    Eigen::MatrixXd centers(k, points.cols());
    std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
    centers.row(0) = points.row(pick(rng));
    std::vector<double> d2(static_cast<std::size_t>(n));
    for (int c = 1; c < k; ++c) {
      double total = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        double m = std::numeric_limits<double>::infinity();
        for (int j = 0; j < c; ++j) m = std::min(m, (points.row(i) - centers.row(j)).squaredNorm());
        d2[static_cast<std::size_t>(i)] = m;
        total += m;
      }
      Eigen::Index chosen = pick(rng);
      if (total > 0.0) {
        std::discrete_distribution<Eigen::Index> dd(d2.begin(), d2.end());
        chosen = dd(rng);
      }
      centers.row(c) = points.row(chosen);
    }

    std::vector<int> labels(static_cast<std::size_t>(n), -1);
    for (int iter = 0; iter < 100; ++iter) {
      bool changed = false;
      for (Eigen::Index i = 0; i < n; ++i) {
        int arg = 0;
        double m = std::numeric_limits<double>::infinity();
        for (int j = 0; j < k; ++j) {
          const double d = (points.row(i) - centers.row(j)).squaredNorm();
          if (d < m) {
            m = d;
            arg = j;
          }
        }
        if (labels[static_cast<std::size_t>(i)] != arg) {
          labels[static_cast<std::size_t>(i)] = arg;
          changed = true;
        }
      }
      if (!changed) break;
      Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, points.cols());
      std::vector<int> counts(static_cast<std::size_t>(k), 0);
      for (Eigen::Index i = 0; i < n; ++i) {
        sums.row(labels[static_cast<std::size_t>(i)]) += points.row(i);
        ++counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
      }
      for (int j = 0; j < k; ++j) {
        if (counts[static_cast<std::size_t>(j)] > 0) centers.row(j) = sums.row(j) / counts[static_cast<std::size_t>(j)];
      }
    }
    double inertia = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      inertia += (points.row(i) - centers.row(labels[static_cast<std::size_t>(i)])).squaredNorm();
    }
    if (inertia < best_inertia) {
      best_inertia = inertia;
      best_labels = labels;
    }
  }
  return best_labels;
}

}  // namespace detail

struct SpectralResult {
  std::vector<int> labels;
  int num_speakers = 0;
  std::vector<double> eigenvalues;  // smallest normalized-Laplacian eigenvalues examined
};

// Number of clusters from the largest gap among the smallest eigenvalues
// (ascending). At most `max_k` clusters.
inline int eigengap_count(std::span<const double> ascending, int max_k) {
  const std::size_t m = std::min(ascending.size(), static_cast<std::size_t>(max_k) + 1);
  int k = 1;
  double best = -1.0;
  for (std::size_t i = 0; i + 1 < m; ++i) {
    const double gap = ascending[i + 1] - ascending[i];
    if (gap > best + 1e-12) {
      best = gap;
      k = static_cast<int>(i) + 1;
    }
  }
  return k;
}

inline SpectralResult spectral_cluster(const Eigen::MatrixXd& affinity, int max_speakers = kDefaultMaxSpeakers,
                                       std::uint64_t seed = 0, int restarts = 10) {
  if (affinity.rows() != affinity.cols()) throw ConstraintError("affinity must be square");
  if (max_speakers < 1) throw ConstraintError("max_speakers must be >= 1");
  if (!affinity.allFinite()) throw ConstraintError("affinity has non-finite values");
  const Eigen::MatrixXd sym = (affinity + affinity.transpose()) / 2.0;
  if ((sym.array() < 0.0).any()) throw ConstraintError("affinity must be non-negative");
  const Eigen::Index n = sym.rows();
  SpectralResult out;
  if (n == 0) return out;

  const Eigen::VectorXd degree = sym.rowwise().sum();
  std::vector<Eigen::Index> keep, isolated;
  for (Eigen::Index i = 0; i < n; ++i) (degree(i) > 1e-12 ? keep : isolated).push_back(i);

  std::vector<int> labels(static_cast<std::size_t>(n), -1);
  int next_label = 0;
  if (!keep.empty()) {
    const auto m = static_cast<Eigen::Index>(keep.size());
    Eigen::MatrixXd lap(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = 0; j < m; ++j) {
        const double s = sym(keep[static_cast<std::size_t>(i)], keep[static_cast<std::size_t>(j)]);
        lap(i, j) = (i == j ? 1.0 : 0.0) -
                    s / std::sqrt(degree(keep[static_cast<std::size_t>(i)]) * degree(keep[static_cast<std::size_t>(j)]));
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(lap);
    if (solver.info() != Eigen::Success) throw ConstraintError("eigendecomposition failed");
    const auto& evals = solver.eigenvalues();
    const std::size_t examined = std::min<std::size_t>(static_cast<std::size_t>(m), static_cast<std::size_t>(max_speakers) + 1);
    out.eigenvalues.assign(evals.data(), evals.data() + examined);
    const int k = eigengap_count(out.eigenvalues, max_speakers);

    Eigen::MatrixXd emb = solver.eigenvectors().leftCols(k);
    for (Eigen::Index i = 0; i < m; ++i) {
      const double norm = emb.row(i).norm();
      if (norm > 0.0) emb.row(i) /= norm;
    }
    const auto km = detail::kmeans(emb, k, seed, restarts);
    for (Eigen::Index i = 0; i < m; ++i) labels[static_cast<std::size_t>(keep[static_cast<std::size_t>(i)])] = km[static_cast<std::size_t>(i)];
    next_label = k;
  }
  for (auto i : isolated) labels[static_cast<std::size_t>(i)] = next_label++;
  out.labels = canonical_labels(labels);
  out.num_speakers = out.labels.empty() ? 0 : *std::max_element(out.labels.begin(), out.labels.end()) + 1;
  return out;
}

// Row-wise pruning: each row keeps its largest ceil(keep_fraction * n)
// entries (at least min(n, 4)) and zeroes the rest. Ties go to the lower
// column. keep_fraction 0 returns the matrix unchanged.
inline Eigen::MatrixXd prune_rows(const Eigen::MatrixXd& affinity, double keep_fraction) {
  if (!(keep_fraction >= 0.0 && keep_fraction <= 1.0)) throw ConstraintError("prune fraction must lie in [0,1]");
  if (keep_fraction == 0.0) return affinity;
  const Eigen::Index n = affinity.rows();
  const auto keep = std::max<Eigen::Index>(static_cast<Eigen::Index>(std::ceil(keep_fraction * static_cast<double>(n) - 1e-9)),
                                           std::min<Eigen::Index>(n, 4));
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, affinity.cols());
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(affinity.cols()));
  for (Eigen::Index i = 0; i < n; ++i) {
    std::iota(idx.begin(), idx.end(), 0);
    const auto mid = idx.begin() + std::min<Eigen::Index>(keep, affinity.cols());
    std::partial_sort(idx.begin(), mid, idx.end(), [&](Eigen::Index a, Eigen::Index b) {
      return affinity(i, a) > affinity(i, b) || (affinity(i, a) == affinity(i, b) && a < b);
    });
    for (auto it = idx.begin(); it != mid; ++it) out(i, *it) = affinity(i, *it);
  }
  return out;
}

// Full spectral recipe on uniform-segment embeddings: affinity, row pruning,
// eigen-gap clustering.
inline Diarization diarize_sc(const EmbeddingSequence& embs, const AffinityProvider& provider,
                              std::string recording_id, int max_speakers = kDefaultMaxSpeakers,
                              std::size_t context = kDefaultContext, std::uint64_t seed = 0,
                              double prune = kDefaultPrune) {
  if (embs.empty()) return Diarization{std::move(recording_id), {}};
  const auto affinity = prune_rows(affinity_rows(embs, provider, context), prune);
  const auto result = spectral_cluster(affinity, max_speakers, seed);
  return labels_to_diarization(embs, result.labels, std::move(recording_id));
}

}  // namespace diarkit::cluster
