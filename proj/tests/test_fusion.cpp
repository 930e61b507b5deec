#include <gtest/gtest.h>

#include <random>

#include "diarkit/fusion.hpp"
#include "mapping_oracle.hpp"
#include "oracles.hpp"

using namespace diarkit;
using namespace diarkit::fusion;

namespace {

Diarization D(std::initializer_list<Turn> turns) { return normalized(Diarization{"rec", turns}); }

std::vector<Diarization> random_systems(std::mt19937_64& rng, int n_systems, int max_speakers) {
  std::vector<Diarization> out;
  for (int s = 0; s < n_systems; ++s) {
    out.push_back(oracle::random_diarization(rng, max_speakers, 12, 30.0, "rec", "s" + std::to_string(s) + "_"));
  }
  return out;
}

}  // namespace

TEST(MapLabels, PermutedIdenticalSystemsAlign) {
  const auto a = D({{{0, 5}, "A"}, {{5, 9}, "B"}, {{4, 6}, "C"}});
  const auto b = oracle::relabel(a, {{"A", "x"}, {"B", "y"}, {"C", "z"}});
  const std::vector<Diarization> systems{a, b};
  const auto m = map_labels(systems);
  EXPECT_EQ(m.systems[0], m.systems[1]);
  EXPECT_EQ(m.order.size(), 3u);
}

TEST(MapLabels, DisjointSystemsGetFreshLabels) {
  const std::vector<Diarization> systems{D({{{0, 5}, "A"}}), D({{{6, 9}, "A"}, {{10, 12}, "B"}})};
  const auto m = map_labels(systems);
  EXPECT_EQ(m.order, (std::vector<std::string>{"A", "fused0", "fused1"}));
  EXPECT_EQ(speakers(m.systems[1]), (std::vector<std::string>{"fused0", "fused1"}));
}

TEST(MapLabels, MatchesExhaustiveOracle) {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 200; ++trial) {
    const auto systems = random_systems(rng, 2 + trial % 2, 4);
    EXPECT_EQ(oracle::check_mapping_exhaustively(systems, map_labels(systems)), "") << trial;
  }
}

TEST(RankWeights, Values) {
  const auto w = rank_weights(3);
  const double z = 1 + std::sqrt(0.5) + std::sqrt(1.0 / 3);
  EXPECT_NEAR(w[0], 1 / z, 1e-12);
  EXPECT_NEAR(w[1], std::sqrt(0.5) / z, 1e-12);
  EXPECT_NEAR(w[2], std::sqrt(1.0 / 3) / z, 1e-12);
  EXPECT_EQ(rank_weights(4, 0.0), std::vector<double>(4, 0.25));
}

TEST(DoverlapFuse, Examples) {
  const auto a = D({{{0, 1}, "A"}});
  const auto b = D({{{0, 1}, "B"}});
  const std::vector<Diarization> three{a, a, b};
  const std::vector<double> equal{1, 1, 1};
  EXPECT_EQ(doverlap_fuse(three, equal), a);

  const std::vector<Diarization> one{a};
  EXPECT_EQ(fuse(one), a);

  const std::vector<double> bad{1, -1, 1};
  EXPECT_THROW(doverlap_fuse(three, bad), ConstraintError);
  EXPECT_THROW(doverlap_fuse(three, std::vector<double>{1, 1}), ConstraintError);
  EXPECT_THROW(doverlap_fuse(three, std::vector<double>{0, 0, 0}), ConstraintError);
}

TEST(DoverlapFuse, CountIsRoundedWeightedMean) {
  // Two of three systems mark overlap on (2,3): mean count 5/3 rounds to 2.
  const auto two = D({{{0, 3}, "A"}, {{2, 5}, "B"}});
  const auto one = D({{{0, 2.5}, "A"}, {{2.5, 5}, "B"}});
  const std::vector<Diarization> systems{two, two, one};
  const auto out = doverlap_fuse(systems, std::vector<double>{1, 1, 1});
  EXPECT_EQ(out, two);
}

TEST(Fuse, IdenticalCopiesAreIdempotent) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0.1, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    const auto d = oracle::random_diarization(rng, 4, 12);
    const std::size_t k = 1 + trial % 4;
    std::vector<Diarization> copies(k, d);
    std::vector<double> w(k);
    for (auto& x : w) x = u(rng);
    EXPECT_TRUE(oracle::same_up_to_relabel(fuse(copies, w), d)) << trial;
  }
}

TEST(Fuse, InvariantUnderRelabelingAnInput) {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 200; ++trial) {
    auto systems = random_systems(rng, 3, 4);
    const auto base = fuse(systems);
    const std::size_t which = static_cast<std::size_t>(trial) % systems.size();
    systems[which] = oracle::relabel(systems[which], oracle::random_renaming(systems[which], rng, "q"));
    EXPECT_TRUE(oracle::same_up_to_relabel(fuse(systems), base)) << trial;
  }
}

TEST(Fuse, RegionCountWithinInputRange) {
  std::mt19937_64 rng(37);
  for (int trial = 0; trial < 200; ++trial) {
    const auto systems = random_systems(rng, 2 + trial % 3, 4);
    const auto out = fuse(systems);
    std::vector<double> cuts;
    for (const auto* d : {&out}) {
      for (const auto& t : d->turns) {
        cuts.push_back(t.segment.onset);
        cuts.push_back(t.segment.offset);
      }
    }
    for (const auto& s : systems) {
      for (const auto& t : s.turns) {
        cuts.push_back(t.segment.onset);
        cuts.push_back(t.segment.offset);
      }
    }
    std::sort(cuts.begin(), cuts.end());
    auto active = [](const Diarization& d, double t) {
      int n = 0;
      for (const auto& [spk, segs] : speaker_supports(d)) n += covers(segs, t) ? 1 : 0;
      return n;
    };
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      if (cuts[i + 1] - cuts[i] < 1e-9) continue;
      const double mid = 0.5 * (cuts[i] + cuts[i + 1]);
      int lo = 1 << 20, hi = 0;
      for (const auto& s : systems) {
        lo = std::min(lo, active(s, mid));
        hi = std::max(hi, active(s, mid));
      }
      const int got = active(out, mid);
      EXPECT_GE(got, lo);
      EXPECT_LE(got, hi);
    }
  }
}
