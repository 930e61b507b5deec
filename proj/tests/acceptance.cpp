// Acceptance suite. One PASS/FAIL line per criterion; exit status is the
// number of failures (capped at 1).

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "diarkit/diarkit.hpp"
#include "mapping_oracle.hpp"
#include "oracles.hpp"

using namespace diarkit;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

bool pct_equal(double a, double b, double tol) {
  if (std::isinf(a) || std::isinf(b)) return a == b;
  return std::abs(a - b) <= tol;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome der_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(101);
  int agree = 0;
  double worst = 0;
  for (int i = 0; i < 500; ++i) {
    const auto ref = oracle::random_diarization(rng, 5, 20, 30.0, "rec", "r");
    const auto hyp = oracle::random_diarization(rng, 5, 20, 30.0, "rec", "h");
    const double collar = (i % 2) ? 0.25 : 0.0;
    const bool score_overlap = (i / 2) % 2 == 0;
    const auto r = metrics::der(ref, hyp, collar, score_overlap);
    const auto b = oracle::brute_force_der(ref, hyp, collar, score_overlap);
    const double diff = std::max({std::abs(r.false_alarm - b.fa), std::abs(r.missed - b.miss),
                                  std::abs(r.confusion - b.confusion)});
    worst = std::max(worst, diff);
    agree += pct_equal(r.der_pct, b.der_pct, 1e-9) && diff <= 1e-9 ? 1 : 0;
  }
  const double secs = seconds_since(t0);
  return {agree == 500 && secs < 10.0,
          fmt("%d/500 agree to 1e-9 (max term diff %.2e s), %.2f s (< 10 s)", agree, worst, secs)};
}

Outcome scorer_sanity() {
  std::mt19937_64 rng(102);
  int zero = 0, empty_ok = 0;
  for (int i = 0; i < 200; ++i) {
    const auto d = oracle::random_diarization(rng, 5, 20);
    const auto self = metrics::der(d, d);
    const auto self0 = metrics::der(d, d, 0.0, true);
    zero += self.der_pct == 0.0 && self0.der_pct == 0.0 ? 1 : 0;
    const auto e = metrics::der(d, Diarization{d.recording_id, {}}, 0.0, true);
    empty_ok += e.der_pct == 100.0 && e.miss_pct == 100.0 && e.false_alarm == 0.0 && e.confusion == 0.0 ? 1 : 0;
  }
  return {zero == 200 && empty_ok == 200,
          fmt("der(x,x)=0 in %d/200, empty hyp = 100%% MISS in %d/200", zero, empty_ok)};
}

Outcome ahc_recovery() {
  const auto t0 = std::chrono::steady_clock::now();
  int exact = 0;
  double der_sum = 0;
  for (int i = 0; i < 20; ++i) {
    const int n = 2 + i % 9;
    const auto seed = static_cast<std::uint64_t>(500 + i);
    const auto truth = simulate::generate_conversation(n, 600.0, seed, {}, "rec");
    const auto embs = simulate::simulate_embeddings(truth, 256, 0.9, seed + 1000);
    const auto hyp = cluster::diarize_ahc(embs, cluster::AhcParams{}, "rec");
    exact += speakers(hyp).size() == speakers(truth).size() ? 1 : 0;
    der_sum += metrics::der(truth, hyp, 0.0, false).der_pct;
  }
  const double secs = seconds_since(t0);
  const double mean = der_sum / 20.0;
  return {exact >= 18 && mean <= 2.0 && secs < 30.0,
          fmt("exact count %d/20 (>= 18), mean DER %.3f%% (<= 2.0), %.2f s (< 30 s)", exact, mean, secs)};
}

Eigen::MatrixXd block_affinity(const std::vector<int>& sizes) {
  int n = 0;
  for (int s : sizes) n += s;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  int start = 0;
  for (int s : sizes) {
    a.block(start, start, s, s).setOnes();
    start += s;
  }
  return a;
}

Outcome spectral_block() {
  std::mt19937_64 rng(103);
  std::uniform_int_distribution<int> size(2, 8);
  int ok = 0;
  for (int i = 0; i < 50; ++i) {
    const int k = 1 + i % 10;
    std::vector<int> sizes, truth;
    for (int b = 0; b < k; ++b) {
      sizes.push_back(size(rng));
      truth.insert(truth.end(), static_cast<std::size_t>(sizes.back()), b);
    }
    const auto r = cluster::spectral_cluster(block_affinity(sizes), cluster::kDefaultMaxSpeakers,
                                             static_cast<std::uint64_t>(i));
    ok += r.num_speakers == k && oracle::same_partition(r.labels, truth) ? 1 : 0;
  }
  return {ok == 50, fmt("exact k and blocks in %d/50 (100%%)", ok)};
}

Outcome spectral_planted() {
  std::mt19937_64 rng(104);
  std::uniform_real_distribution<double> jitter(-0.05, 0.05);
  int ok = 0;
  for (int i = 0; i < 100; ++i) {
    const int k = 2 + i % 4;
    const int n = 20 * k;
    Eigen::MatrixXd a(n, n);
    for (int p = 0; p < n; ++p) {
      for (int q = p; q < n; ++q) a(p, q) = a(q, p) = (p / 20 == q / 20 ? 0.9 : 0.1) + jitter(rng);
    }
    std::vector<int> truth(static_cast<std::size_t>(n));
    for (int p = 0; p < n; ++p) truth[static_cast<std::size_t>(p)] = p / 20;
    const auto r = cluster::spectral_cluster(a, cluster::kDefaultMaxSpeakers, static_cast<std::uint64_t>(i));
    ok += oracle::same_partition(r.labels, truth) ? 1 : 0;
  }
  return {ok >= 95, fmt("recovered %d/100 (>= 95)", ok)};
}

Outcome partial_assignment() {
  int improved = 0, miss_ok = 0;
  for (int i = 0; i < 50; ++i) {
    const auto seed = static_cast<std::uint64_t>(700 + i);
    const auto truth = simulate::generate_conversation(2 + i % 4, 300.0, seed, {}, "rec");
    const auto base = cluster::diarize_ahc(simulate::simulate_embeddings(truth, 256, 0.9, seed + 1), {}, "rec");
    const overlap::TsVadConfig cfg;
    const auto sel = overlap::select_targets(base, {}, cfg);
    // Oracle posteriors: each base label carries the activity of the
    // reference speaker it is matched to.
    const auto before = metrics::der(truth, base);
    std::map<std::string, std::vector<Segment>> renamed;
    for (const auto& [spk, segs] : speaker_supports(truth)) {
      auto it = before.mapping.find(spk);
      renamed[it == before.mapping.end() ? "\x01" + spk : it->second] = segs;
    }
    const CompactTimeline tl(speech_support(truth));
    const auto slots = sel.slot_speakers();
    const auto post = simulate::simulate_tsvad_posteriors(from_supports("rec", renamed), slots, 0.2,
                                                          kDefaultFrameShift, tl);
    const auto ts = overlap::tsvad_decode(post, slots, cfg, tl, "rec");
    const auto after = metrics::der(truth, overlap::merge_partial(base, ts));
    improved += after.der_pct < before.der_pct ? 1 : 0;
    miss_ok += after.missed <= before.missed + 1e-9 ? 1 : 0;
  }
  return {improved >= 45 && miss_ok == 50,
          fmt("DER lower in %d/50 (>= 45), MISS not increased in %d/50 (50)", improved, miss_ok)};
}

Outcome vad_fusion() {
  std::mt19937_64 rng(105);
  std::bernoulli_distribution flip(0.1);
  std::uniform_real_distribution<double> run(0.2, 3.0);
  int better = 0;
  for (int trial = 0; trial < 100; ++trial) {
    // Reference alternates speech and silence runs over 60 s.
    std::vector<Segment> speech;
    for (double t = run(rng); t < 60.0;) {
      const double end = std::min(60.0, t + run(rng));
      speech.push_back({t, end});
      t = end + run(rng);
    }
    const auto ref = rasterize(speech, kDefaultFrameShift, 60.0);
    std::vector<FrameTrack> systems(3, ref);
    double single = 0;
    for (auto& s : systems) {
      for (auto& v : s.values) {
        if (flip(rng)) v = 1.0f - v;
      }
      single += vad::vad_metrics(s, ref).error_pct;
    }
    const auto fused = vad::fuse_majority(systems);
    better += vad::vad_metrics(fused, ref).error_pct < single / 3.0 ? 1 : 0;
  }
  return {better >= 95, fmt("fused error below mean single error in %d/100 (>= 95)", better)};
}

Outcome doverlap_invariants() {
  std::mt19937_64 rng(106);
  auto systems_of = [&](int n) {
    std::vector<Diarization> out;
    for (int s = 0; s < n; ++s) {
      out.push_back(oracle::random_diarization(rng, 4, 12, 30.0, "rec", "s" + std::to_string(s) + "_"));
    }
    return out;
  };
  auto active = [](const Diarization& d, double t) {
    int n = 0;
    for (const auto& [spk, segs] : speaker_supports(d)) n += covers(segs, t) ? 1 : 0;
    return n;
  };
  int relabel_ok = 0, idem_ok = 0, count_ok = 0, map_ok = 0;
  for (int i = 0; i < 200; ++i) {
    auto systems = systems_of(2 + i % 3);
    const auto fused = fusion::fuse(systems);

    std::vector<double> cuts;
    for (const auto* d : {&fused}) {
      for (const auto& t : d->turns) cuts.insert(cuts.end(), {t.segment.onset, t.segment.offset});
    }
    for (const auto& s : systems) {
      for (const auto& t : s.turns) cuts.insert(cuts.end(), {t.segment.onset, t.segment.offset});
    }
    std::sort(cuts.begin(), cuts.end());
    bool within = true;
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
      if (cuts[c + 1] - cuts[c] < 1e-9) continue;
      const double mid = 0.5 * (cuts[c] + cuts[c + 1]);
      int lo = 1 << 20, hi = 0;
      for (const auto& s : systems) {
        lo = std::min(lo, active(s, mid));
        hi = std::max(hi, active(s, mid));
      }
      const int got = active(fused, mid);
      within = within && got >= lo && got <= hi;
    }
    count_ok += within ? 1 : 0;

    const std::vector<Diarization> copies(1 + i % 4, systems[0]);
    idem_ok += oracle::same_up_to_relabel(fusion::fuse(copies), systems[0]) ? 1 : 0;

    const std::size_t which = static_cast<std::size_t>(i) % systems.size();
    auto renamed = systems;
    renamed[which] = oracle::relabel(systems[which], oracle::random_renaming(systems[which], rng, "q"));
    relabel_ok += oracle::same_up_to_relabel(fusion::fuse(renamed), fused) ? 1 : 0;

    const auto small = systems_of(2 + i % 2);
    map_ok += oracle::check_mapping_exhaustively(small, fusion::map_labels(small)).empty() ? 1 : 0;
  }
  return {relabel_ok == 200 && idem_ok == 200 && count_ok == 200 && map_ok == 200,
          fmt("relabel %d/200, idempotent %d/200, region count %d/200, mapping vs exhaustive %d/200", relabel_ok,
              idem_ok, count_ok, map_ok)};
}

Outcome io_round_trips() {
  std::mt19937_64 rng(107);
  std::uniform_real_distribution<float> uf(-1, 1), up(0, 1);
  int rttm_ok = 0, emb_ok = 0, post_ok = 0;
  for (int i = 0; i < 1000; ++i) {
    io::RttmMap m;
    for (int r = 0; r < 1 + i % 3; ++r) {
      auto d = oracle::random_diarization(rng, 5, 20, 300.0, "rec" + std::to_string(r));
      m.emplace(d.recording_id, std::move(d));
    }
    const auto text = io::write_rttm(m);
    rttm_ok += io::write_rttm(io::parse_rttm(text)) == text ? 1 : 0;

    EmbeddingSequence e{static_cast<std::size_t>(1 + i % 17), {}};
    double t = 0;
    for (int r = 0; r < i % 23; ++r) {
      EmbeddingRecord rec{{t, t + 1.28}, std::vector<float>(e.dim)};
      for (auto& v : rec.vector) v = uf(rng);
      e.records.push_back(std::move(rec));
      t += 0.32;
    }
    const auto eb = io::write_embeddings(e);
    emb_ok += io::write_embeddings(io::read_embeddings(eb)) == eb && io::read_embeddings(eb) == e ? 1 : 0;

    std::vector<FrameTrack> tracks(static_cast<std::size_t>(i % 9),
                                   FrameTrack{0.01, std::vector<float>(static_cast<std::size_t>(i % 301))});
    for (auto& tr : tracks) {
      for (auto& v : tr.values) v = up(rng);
    }
    const auto pb = io::write_posteriors(tracks);
    post_ok += io::write_posteriors(io::read_posteriors(pb)) == pb && io::read_posteriors(pb) == tracks ? 1 : 0;
  }
  return {rttm_ok == 1000 && emb_ok == 1000 && post_ok == 1000,
          fmt("RTTM %d/1000, embeddings %d/1000, posteriors %d/1000 byte-exact", rttm_ok, emb_ok, post_ok)};
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"der-oracle-equivalence", der_oracle},
      {"scorer-sanity", scorer_sanity},
      {"ahc-pipeline-recovery", ahc_recovery},
      {"spectral-block-diagonal", spectral_block},
      {"spectral-planted-partition", spectral_planted},
      {"partial-assignment-direction", partial_assignment},
      {"vad-fusion-direction", vad_fusion},
      {"doverlap-invariants", doverlap_invariants},
      {"io-round-trips", io_round_trips},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  const double total = seconds_since(t0);
  const bool fast = total < 60.0;
  failures += fast ? 0 : 1;
  std::printf("%s suite-runtime: %.2f s (< 60 s)\n", fast ? "PASS" : "FAIL", total);
  return failures == 0 ? 0 : 1;
}
