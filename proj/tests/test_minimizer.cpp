#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>

#include "hysortk/minimizer.hpp"
#include "oracle.hpp"

using namespace hysortk;

namespace {

// Scores looked up in a table; unknown m-mers score high.
struct TableScorer {
  std::map<std::uint64_t, std::uint64_t> table;
  std::uint64_t key(std::uint64_t fwd, std::uint64_t) const { return fwd; }
  std::uint64_t score(std::uint64_t key) const {
    auto it = table.find(key);
    return it == table.end() ? 1000 : it->second;
  }
};

// Keeps only the low bits of the hash so distinct m-mers collide often.
struct TruncatedScorer {
  std::uint64_t seed = kDefaultSeed;
  std::uint64_t bits = 4;
  std::uint64_t key(std::uint64_t fwd, std::uint64_t) const { return fwd; }
  std::uint64_t score(std::uint64_t key) const {
    return mmer_score(key, seed) & ((1ULL << bits) - 1);
  }
};

void expect_equal(const std::vector<ScoredMmer>& got,
                  const std::vector<oracle::NaiveMinimizer>& want) {
  ASSERT_EQ(got.size(), want.size());
  for (std::size_t i = 0; i < got.size(); ++i) {
    ASSERT_EQ(got[i].score, want[i].score) << "k-mer " << i;
    ASSERT_EQ(got[i].mmer, want[i].mmer) << "k-mer " << i;
    ASSERT_EQ(got[i].pos, want[i].pos) << "k-mer " << i;
  }
}

}  // namespace

TEST(MmerScore, FrozenFinalizerValues) {
  EXPECT_EQ(mmer_score(0, 0), 0u);
  // Values computed with an independent Python implementation.
  EXPECT_EQ(mmer_score(1, 0), 0xb456bcfc34c2cb2cULL);
  EXPECT_EQ(mmer_score(27, 0), 0x7ed3adb081e15aecULL);
  EXPECT_EQ(mmer_score(27, kDefaultSeed), 0xeafc6ec56d90befeULL);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 1000; ++i) {
    const std::uint64_t x = rng();
    EXPECT_EQ(mmer_score(x, 0), oracle::ref_fmix64(x));
  }
}

TEST(DestinationTask, Examples) {
  EXPECT_EQ(destination_task(0, 8), 0u);
  EXPECT_EQ(destination_task(27, 4), 3u);
}

TEST(DestinationTask, UniformOverRandomScores) {
  std::mt19937_64 rng(2);
  std::vector<std::uint64_t> hits(256, 0);
  const int n = 1'000'000;
  for (int i = 0; i < n; ++i) ++hits[destination_task(mmer_score(rng(), kDefaultSeed), 256)];
  const double expect = n / 256.0;
  for (auto h : hits) EXPECT_LT(std::abs(h - expect) / expect, 0.05);
}

TEST(Minimizers, SingleDistinctMmer) {
  const auto mz = minimizers_of_read(Read{0, "AAAAC"}, 4, 2);
  ASSERT_EQ(mz.size(), 2u);
  EXPECT_EQ(mz[0].mmer, 0u);  // "AA"
  EXPECT_LE(mz[0].pos, 2u);
  EXPECT_EQ(mz[0].pos, 0u);  // leftmost tie-break
}

TEST(Minimizers, HandCheckedSlidingMinimum) {
  // 2-mers of AACGTT: AA=0 AC=1 CG=6 GT=11 TT=15, scored [5,3,4,1,2].
  TableScorer sc{{{0, 5}, {1, 3}, {6, 4}, {11, 1}, {15, 2}}};
  const auto mz = minimizers_of_read(Read{0, "AACGTT"}, 4, 2, sc);
  ASSERT_EQ(mz.size(), 3u);
  EXPECT_EQ(mz[0].score, 3u);
  EXPECT_EQ(mz[1].score, 1u);
  EXPECT_EQ(mz[2].score, 1u);
  EXPECT_EQ(mz[1].pos, 3u);
}

TEST(Minimizers, MatchesNaiveScan) {
  std::mt19937_64 rng(3);
  const HashScorer hs{};
  for (int rep = 0; rep < 300; ++rep) {
    const std::string s = oracle::random_dna(rng, 31 + rng() % 400);
    const auto got = minimizers_of_read(Read{0, s}, 31, 15, hs);
    expect_equal(got, oracle::naive_minimizers(s, 31, 15, [](std::uint64_t v) {
                   return oracle::ref_fmix64(v ^ kDefaultSeed);
                 }));
  }
}

TEST(Minimizers, CanonicalMatchesNaiveScan) {
  std::mt19937_64 rng(4);
  const HashScorer hs{kDefaultSeed, true};
  for (int rep = 0; rep < 100; ++rep) {
    const std::string s = oracle::random_dna(rng, 40 + rng() % 200);
    const auto got = minimizers_of_read(Read{0, s}, 21, 11, hs);
    expect_equal(got, oracle::naive_minimizers(
                          s, 21, 11,
                          [](std::uint64_t v) { return oracle::ref_fmix64(v ^ kDefaultSeed); },
                          true));
  }
}

TEST(Minimizers, CollidingScoresUseLexThenLeftmost) {
  std::mt19937_64 rng(5);
  const TruncatedScorer ts{kDefaultSeed, 3};
  for (int rep = 0; rep < 300; ++rep) {
    const std::string s = oracle::random_dna(rng, 20 + rng() % 200);
    const auto got = minimizers_of_read(Read{0, s}, 15, 5, ts);
    expect_equal(got, oracle::naive_minimizers(s, 15, 5, [&](std::uint64_t v) {
                   return oracle::ref_fmix64(v ^ kDefaultSeed) & 7;
                 }));
  }
  // Repeated m-mers: equal (score, m-mer) at several positions.
  const std::string rep = "ACACACACACACACACACACAC";
  const auto got = minimizers_of_read(Read{0, rep}, 8, 2, ts);
  expect_equal(got, oracle::naive_minimizers(rep, 8, 2, [&](std::uint64_t v) {
                 return oracle::ref_fmix64(v ^ kDefaultSeed) & 7;
               }));
}

TEST(Minimizers, BufferStaysMonotonicAndAmortized) {
  std::mt19937_64 rng(6);
  const std::string s = oracle::random_dna(rng, 5000);
  MinimizerWindow window;
  std::vector<ScoredMmer> out;
  minimizers_of_bases(s, 31, 15, HashScorer{}, out, window);
  EXPECT_EQ(window.insertions(), s.size() - 15 + 1);
  EXPECT_LE(window.evictions() + window.expirations(), window.insertions());
  const auto& e = window.entries();
  for (std::size_t i = 1; i < e.size(); ++i) EXPECT_TRUE(precedes(e[i - 1], e[i]));
}

TEST(Minimizers, Deterministic) {
  std::mt19937_64 rng(7);
  const Read r{0, oracle::random_dna(rng, 3000)};
  EXPECT_EQ(minimizers_of_read(r, 31, 15), minimizers_of_read(r, 31, 15));
}

TEST(Minimizers, SingleKmerScanAgreesWithWindow) {
  std::mt19937_64 rng(8);
  const std::string s = oracle::random_dna(rng, 500);
  for (bool canon : {false, true}) {
    const HashScorer hs{kDefaultSeed, canon};
    const auto mz = minimizers_of_read(Read{0, s}, 41, 20, hs);
    for (std::size_t i = 0; i < mz.size(); ++i) {
      const auto one = minimizer_of_kmer(pack_kmer<2>(s.substr(i, 41), 41), 41, 20, hs);
      ASSERT_EQ(one.score, mz[i].score);
      ASSERT_EQ(one.pos + i, mz[i].pos);
    }
  }
}

TEST(Minimizers, CanonicalDestinationIsStrandIndependent) {
  std::mt19937_64 rng(9);
  const HashScorer hs{kDefaultSeed, true};
  for (int rep = 0; rep < 500; ++rep) {
    const std::string s = oracle::random_dna(rng, 31);
    const auto a = minimizer_of_kmer(pack_kmer<1>(s, 31), 31, 15, hs);
    const auto b = minimizer_of_kmer(pack_kmer<1>(oracle::revcomp(s), 31), 31, 15, hs);
    EXPECT_EQ(a.score, b.score);
  }
}

TEST(Minimizers, RejectsBadParameters) {
  EXPECT_THROW(minimizers_of_read(Read{0, "ACGTACGT"}, 4, 4), ConfigError);
  EXPECT_THROW(minimizers_of_read(Read{0, "ACGTACGT"}, 40, 32), ConfigError);
}
