#pragma once

// Hash-ordered minimizers over consecutive k-mers.
//
// Every m-mer is scored by a 64-bit avalanche hash. The minimizer of a k-mer
// is the m-mer with the smallest (score, m-mer value, position) among the
// k - m + 1 m-mers it contains. The destination task is score mod s, so the
// same hash both picks the minimizer and routes the k-mer.

#include <cstdint>
#include <deque>
#include <string_view>
#include <tuple>
#include <vector>

#include "hysortk/seq.hpp"

namespace hysortk {

inline constexpr std::uint64_t kDefaultSeed = 0x9E3779B97F4A7C15ULL;

// 64-bit MurmurHash3 finalizer.
constexpr std::uint64_t fmix64(std::uint64_t x) {
  x ^= x >> 33;
  x *= 0xff51afd7ed558ccdULL;
  x ^= x >> 33;
  x *= 0xc4ceb9fe1a85ec53ULL;
  x ^= x >> 33;
  return x;
}

constexpr std::uint64_t mmer_score(std::uint64_t packed_mmer, std::uint64_t seed) {
  return fmix64(packed_mmer ^ seed);
}

constexpr std::uint32_t destination_task(std::uint64_t minimizer_score, std::uint32_t s) {
  return static_cast<std::uint32_t>(minimizer_score % s);
}

/// Default scorer. In canonical mode the m-mer is replaced by the smaller of
/// itself and its reverse complement before hashing, which makes the chosen
/// destination strand-independent.
struct HashScorer {
  std::uint64_t seed = kDefaultSeed;
  bool canonical = false;

  std::uint64_t key(std::uint64_t fwd, std::uint64_t rc) const {
    return canonical && rc < fwd ? rc : fwd;
  }
  std::uint64_t score(std::uint64_t key) const { return mmer_score(key, seed); }
};

struct ScoredMmer {
  std::uint64_t mmer = 0;  // ordering key (canonical m-mer in canonical mode)
  std::uint64_t score = 0;
  std::uint32_t pos = 0;

  friend bool operator==(const ScoredMmer&, const ScoredMmer&) = default;
};

// Total order used to pick the minimizer: score, then lexicographic m-mer,
// then leftmost position.
inline bool precedes(const ScoredMmer& a, const ScoredMmer& b) {
  return std::tie(a.score, a.mmer, a.pos) < std::tie(b.score, b.mmer, b.pos);
}

/// Monotonic buffer over the m-mers of the current k-mer. Entries are strictly
/// increasing front to back under `precedes`; the front is the minimizer.
class MinimizerWindow {
 public:
  void clear() { buf_.clear(); }

  // Evicts back entries the new m-mer beats. An entry with the same
  // (score, m-mer) stays: it is further left, so it wins until it expires.
  void push(const ScoredMmer& e) {
    while (!buf_.empty() &&
           std::tie(e.score, e.mmer) < std::tie(buf_.back().score, buf_.back().mmer)) {
      buf_.pop_back();
      ++evictions_;
    }
    buf_.push_back(e);
    ++insertions_;
  }

  // Positions are increasing in the buffer and the window moves by one base,
  // so at most the front entry can expire.
  void expire_before(std::uint32_t window_start) {
    if (!buf_.empty() && buf_.front().pos < window_start) {
      buf_.pop_front();
      ++expirations_;
    }
  }

  const ScoredMmer& front() const { return buf_.front(); }
  std::size_t size() const { return buf_.size(); }
  bool empty() const { return buf_.empty(); }
  const std::deque<ScoredMmer>& entries() const { return buf_; }

  std::uint64_t insertions() const { return insertions_; }
  std::uint64_t evictions() const { return evictions_; }
  std::uint64_t expirations() const { return expirations_; }

 private:
  std::deque<ScoredMmer> buf_;
  std::uint64_t insertions_ = 0;
  std::uint64_t evictions_ = 0;
  std::uint64_t expirations_ = 0;
};

inline void check_km(unsigned k, unsigned m) {
  if (k < 1 || k > kMaxK) throw ConfigError("k must be in [1, 63]");
  if (m < 1 || m >= k || m > kMaxM) {
    throw ConfigError("m must satisfy 1 <= m < k and m <= 31 (k=" + std::to_string(k) +
                      ", m=" + std::to_string(m) + ")");
  }
}

/// Minimizer of every k-mer of `bases` (one entry per k-mer, left to right).
/// `window` is scratch space so callers can reuse its allocation.
template <class Scorer>
void minimizers_of_bases(std::string_view bases, unsigned k, unsigned m, const Scorer& scorer,
                         std::vector<ScoredMmer>& out, MinimizerWindow& window) {
  check_km(k, m);
  out.clear();
  window.clear();
  if (bases.size() < k) return;
  out.reserve(bases.size() - k + 1);

  const std::uint64_t mask = (1ULL << (2 * m)) - 1;
  const unsigned rc_shift = 2 * (m - 1);
  const std::size_t span = k - m;  // m-mers per k-mer minus one
  std::uint64_t fwd = 0;
  std::uint64_t rc = 0;
  for (std::size_t j = 0; j < bases.size(); ++j) {
    const std::uint64_t c = kBaseCode[static_cast<unsigned char>(bases[j])];
    fwd = ((fwd << 2) | c) & mask;
    rc = (rc >> 2) | ((3u - c) << rc_shift);
    if (j + 1 < m) continue;
    const auto mpos = static_cast<std::uint32_t>(j + 1 - m);
    const std::uint64_t key = scorer.key(fwd, rc);
    window.push(ScoredMmer{key, scorer.score(key), mpos});
    if (mpos >= span) {
      const auto kpos = static_cast<std::uint32_t>(mpos - span);
      window.expire_before(kpos);
      out.push_back(window.front());
    }
  }
}

template <class Scorer = HashScorer>
std::vector<ScoredMmer> minimizers_of_read(const Read& r, unsigned k, unsigned m,
                                           const Scorer& scorer = Scorer{}) {
  std::vector<ScoredMmer> out;
  MinimizerWindow window;
  minimizers_of_bases(r.bases, k, m, scorer, out, window);
  return out;
}

/// Minimizer of a single packed k-mer by direct scan. Used on the receiving
/// side, where the wire format carries no task id.
template <std::size_t W, class Scorer>
ScoredMmer minimizer_of_kmer(const PackedKmer<W>& km, unsigned k, unsigned m,
                             const Scorer& scorer) {
  const u128 v = kmer_value(km, k);
  const std::uint64_t mask = (1ULL << (2 * m)) - 1;
  ScoredMmer best{};
  for (unsigned p = 0; p + m <= k; ++p) {
    const auto fwd = static_cast<std::uint64_t>(v >> (2 * (k - m - p))) & mask;
    const std::uint64_t key = scorer.key(fwd, revcomp_mmer(fwd, m));
    const ScoredMmer cand{key, scorer.score(key), p};
    if (p == 0 || precedes(cand, best)) best = cand;
  }
  return best;
}

}  // namespace hysortk
