#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "diarkit/metrics.hpp"
#include "oracles.hpp"

using namespace diarkit;
using namespace diarkit::metrics;

namespace {

Diarization D(std::initializer_list<Turn> turns) { return normalized(Diarization{"rec", turns}); }

void expect_pct_eq(double a, double b, double tol) {
  if (std::isinf(a) || std::isinf(b)) {
    EXPECT_EQ(a, b);
  } else {
    EXPECT_NEAR(a, b, tol);
  }
}

// Hypothesis derived from a reference by jittering boundaries on the 1 ms
// grid, swapping a fraction of labels and adding spurious turns.
Diarization perturbed(const Diarization& ref, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> jitter(-0.3, 0.3), u(0.0, 1.0);
  const auto spk = speakers(ref);
  std::map<std::string, std::vector<Segment>> sup;
  for (const auto& t : ref.turns) {
    const double on = std::max(0.0, std::round((t.segment.onset + jitter(rng)) * 1000) / 1000);
    const double off = std::round((t.segment.offset + jitter(rng)) * 1000) / 1000;
    if (off - on < 0.01) continue;
    std::string name = t.speaker;
    if (u(rng) < 0.2) name = spk[std::uniform_int_distribution<std::size_t>(0, spk.size() - 1)(rng)];
    sup["h" + name].push_back({on, off});
  }
  for (int i = 0; i < 3; ++i) {
    const double on = std::round(u(rng) * 100000) / 1000;
    sup["hfa"].push_back({on, on + 0.5 + std::round(u(rng) * 2000) / 1000});
  }
  return from_supports(ref.recording_id, sup);
}

double mapped_weight(const std::vector<std::vector<double>>& w, const std::vector<int>& a) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] >= 0) s += w[i][static_cast<std::size_t>(a[i])];
  }
  return s;
}

}  // namespace

TEST(OptimalMapping, SmallCases) {
  EXPECT_EQ(optimal_mapping({{5, 1}, {1, 5}}), (std::vector<int>{0, 1}));
  EXPECT_EQ(optimal_mapping({{0, 3}, {3, 0}}), (std::vector<int>{1, 0}));
  EXPECT_TRUE(optimal_mapping({}).empty());
  // Rectangular: 3 rows, 1 column.
  const auto a = optimal_mapping({{1}, {4}, {2}});
  EXPECT_EQ(a, (std::vector<int>{-1, 0, -1}));
}

TEST(OptimalMapping, MatchesBruteForceOnRandomMatrices) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0, 10);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t rows = 1 + trial % 5, cols = 1 + (trial / 5) % 5;
    std::vector<std::vector<double>> w(rows, std::vector<double>(cols));
    for (auto& r : w) {
      for (auto& x : r) x = u(rng);
    }
    if (trial < 100) {  // square 5x5 block of the acceptance-sized case
      w.assign(5, std::vector<double>(5));
      for (auto& r : w) {
        for (auto& x : r) x = u(rng);
      }
    }
    const auto a = optimal_mapping(w);
    EXPECT_NEAR(mapped_weight(w, a), oracle::brute_force_assignment(w), 1e-9);
  }
}

TEST(Der, IdenticalIsZero) {
  const auto ref = D({{{0, 10}, "A"}, {{5, 12}, "B"}});
  const auto r = der(ref, ref);
  EXPECT_EQ(r.der_pct, 0.0);
  EXPECT_EQ(r.jer_pct, 0.0);
}

TEST(Der, EmptyHypothesisIsAllMiss) {
  const auto ref = D({{{0, 10}, "A"}, {{5, 12}, "B"}});
  const auto r = der(ref, Diarization{"rec", {}});
  EXPECT_DOUBLE_EQ(r.der_pct, 100.0);
  EXPECT_DOUBLE_EQ(r.miss_pct, 100.0);
  EXPECT_DOUBLE_EQ(r.jer_pct, 100.0);
}

TEST(Der, PartialCoverageWithRelabel) {
  const auto r = der(D({{{0, 10}, "A"}}), D({{{0, 8}, "B"}}), 0.0);
  EXPECT_NEAR(r.miss_pct, 20.0, 1e-9);
  EXPECT_NEAR(r.confusion_pct, 0.0, 1e-9);
  EXPECT_NEAR(r.fa_pct, 0.0, 1e-9);
  EXPECT_NEAR(r.der_pct, 20.0, 1e-9);
  EXPECT_EQ(r.mapping.at("A"), "B");
}

TEST(Der, ConfusionAndFalseAlarm) {
  // ref A:(0,10) B:(10,20); hyp X:(0,15) Y:(15,22). X->A, Y->B.
  // confusion on (10,15) = 5, FA on (20,22) = 2; total ref = 20.
  const auto r = der(D({{{0, 10}, "A"}, {{10, 20}, "B"}}), D({{{0, 15}, "X"}, {{15, 22}, "Y"}}), 0.0);
  EXPECT_NEAR(r.confusion_pct, 25.0, 1e-9);
  EXPECT_NEAR(r.fa_pct, 10.0, 1e-9);
  EXPECT_NEAR(r.der_pct, 35.0, 1e-9);
}

TEST(Der, CollarExcludesBoundaries) {
  // Only the boundary at 10 is wrong; a 0.25 s collar hides the 0.2 s error.
  const auto r = der(D({{{0, 10}, "A"}}), D({{{0, 9.8}, "A"}}), 0.25);
  EXPECT_NEAR(r.der_pct, 0.0, 1e-9);
  EXPECT_NEAR(r.scored_speech, 10.0 - 0.25 - 0.25, 1e-9);
}

TEST(Der, OverlapScoringSwitch) {
  const auto ref = D({{{0, 10}, "A"}, {{5, 10}, "B"}});
  const auto hyp = D({{{0, 10}, "A"}});
  EXPECT_NEAR(der(ref, hyp, 0.0, true).miss_pct, 100.0 * 5 / 15, 1e-9);
  EXPECT_NEAR(der(ref, hyp, 0.0, false).der_pct, 0.0, 1e-9);
}

TEST(Der, Errors) {
  EXPECT_THROW(der(Diarization{"a", {}}, Diarization{"b", {}}), ConstraintError);
  EXPECT_THROW(der(Diarization{"a", {}}, Diarization{"a", {}}, -1.0), ConstraintError);
}

TEST(Der, DecompositionSumsAndNonNegative) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const auto ref = oracle::random_diarization(rng, 5, 20);
    const auto hyp = oracle::random_diarization(rng, 5, 20, 30.0, "rec", "h");
    const auto r = der(ref, hyp, 0.25);
    if (r.scored_speech == 0.0) continue;
    EXPECT_NEAR(r.der_pct, r.fa_pct + r.miss_pct + r.confusion_pct, 1e-6);
    EXPECT_GE(r.fa_pct, 0.0);
    EXPECT_GE(r.miss_pct, 0.0);
    EXPECT_GE(r.confusion_pct, -1e-9);
    EXPECT_GE(r.jer_pct, 0.0);
    EXPECT_LE(r.jer_pct, 100.0 + 1e-9);
  }
}

TEST(Der, EqualsExhaustiveMappingOracle) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 150; ++trial) {
    const auto ref = oracle::random_diarization(rng, 5, 20);
    const auto hyp = oracle::random_diarization(rng, 5, 20, 30.0, "rec", "h");
    const double collar = (trial % 3) * 0.25;
    const bool overlap = trial % 2 == 0;
    const auto r = der(ref, hyp, collar, overlap);
    const auto b = oracle::brute_force_der(ref, hyp, collar, overlap);
    expect_pct_eq(r.der_pct, b.der_pct, 1e-9);
    EXPECT_NEAR(r.false_alarm, b.fa, 1e-9);
    EXPECT_NEAR(r.missed, b.miss, 1e-9);
    EXPECT_NEAR(r.confusion, b.confusion, 1e-9);
  }
}

TEST(Der, InvariantUnderRelabeling) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const auto ref = oracle::random_diarization(rng, 4, 15);
    const auto hyp = oracle::random_diarization(rng, 4, 15, 30.0, "rec", "h");
    const auto base = der(ref, hyp);
    const auto r2 = der(oracle::relabel(ref, oracle::random_renaming(ref, rng)),
                        oracle::relabel(hyp, oracle::random_renaming(hyp, rng, "y")));
    expect_pct_eq(base.der_pct, r2.der_pct, 1e-9);
  }
}

TEST(Der, RemovingHypTurnNeverDecreasesMissOrIncreasesFa) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    const auto ref = oracle::random_diarization(rng, 4, 15);
    auto hyp = oracle::random_diarization(rng, 4, 15, 30.0, "rec", "h");
    const auto before = der(ref, hyp, 0.0);
    hyp.turns.erase(hyp.turns.begin() + static_cast<std::ptrdiff_t>(trial % hyp.turns.size()));
    const auto after = der(ref, hyp, 0.0);
    EXPECT_GE(after.missed, before.missed - 1e-9);
    EXPECT_LE(after.false_alarm, before.false_alarm + 1e-9);
  }
}

TEST(Der, FrameScorerAgreesWithIntervalScorer) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    auto ref = oracle::random_diarization(rng, 4, 40, 100.0);
    while (total_duration(speech_support(ref)) < 30.0) ref = oracle::random_diarization(rng, 4, 40, 100.0);
    const auto hyp = perturbed(ref, rng);
    const auto exact = der(ref, hyp, 0.25);
    const auto frames = der_framewise(ref, hyp, 0.25);
    EXPECT_NEAR(exact.der_pct, frames.der_pct, 0.5);
  }
}

TEST(Jer, Examples) {
  const auto ref = D({{{0, 10}, "A"}});
  EXPECT_NEAR(jer(ref, ref, {{"A", "A"}}), 0.0, 1e-12);
  EXPECT_NEAR(jer(ref, Diarization{"rec", {}}, {}), 100.0, 1e-12);
  // Overlap 5 over union 10.
  EXPECT_NEAR(jer(ref, D({{{5, 10}, "H"}}), {{"A", "H"}}), 50.0, 1e-9);
  const auto r = der(ref, D({{{5, 10}, "H"}}), 0.0);
  EXPECT_NEAR(r.jer_pct, 50.0, 1e-9);
}

TEST(Combine, IsTimeWeighted) {
  const auto a = der(D({{{0, 10}, "A"}}), D({{{0, 5}, "A"}}), 0.0);   // 5 of 10 missed
  const auto b = der(D({{{0, 30}, "A"}}), D({{{0, 30}, "A"}}), 0.0);  // perfect
  const std::vector<DerReport> both{a, b};
  EXPECT_NEAR(combine(both).der_pct, 100.0 * 5 / 40, 1e-9);
}
