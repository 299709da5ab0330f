#pragma once

// DNA sequence model: 2-bit base codes, packed k-mers, reverse complement.
//
// Bases are coded A=0, C=1, G=2, T=3 and packed most-significant-first, so
// comparing the packed words as unsigned integers (word 0 first) is the same
// as comparing the base strings lexicographically. Radix sorting the words is
// therefore a valid k-mer sort.

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "hysortk/errors.hpp"

namespace hysortk {

using u128 = unsigned __int128;

inline constexpr unsigned kMaxK = 63;
inline constexpr unsigned kMaxM = 31;
inline constexpr std::uint8_t kInvalidBase = 4;

namespace detail {

constexpr std::array<std::uint8_t, 256> make_base_table() {
  std::array<std::uint8_t, 256> t{};
  for (auto& v : t) v = kInvalidBase;
  t['A'] = 0; t['C'] = 1; t['G'] = 2; t['T'] = 3;
  t['a'] = 0; t['c'] = 1; t['g'] = 2; t['t'] = 3;
  return t;
}

}  // namespace detail

// Lookup table; kInvalidBase marks every non-ACGT byte.
inline constexpr std::array<std::uint8_t, 256> kBaseCode = detail::make_base_table();
inline constexpr std::array<char, 4> kCodeBase = {'A', 'C', 'G', 'T'};

inline std::uint8_t encode_base(char b) {
  const std::uint8_t c = kBaseCode[static_cast<unsigned char>(b)];
  if (c == kInvalidBase) {
    throw IngestError(std::string("non-ACGT base '") + b + "'");
  }
  return c;
}

inline char decode_base(std::uint8_t code) { return kCodeBase[code & 3u]; }

constexpr std::size_t words_for(unsigned k) { return (k + 31) / 32; }

// Number of significant key bytes for a k-mer of length k (4 bases per byte).
constexpr std::size_t key_bytes_for(unsigned k) { return (k + 3) / 4; }

inline void check_k(unsigned k, std::size_t words) {
  if (k < 1 || k > kMaxK) {
    throw ConfigError("k must be in [1, 63], got " + std::to_string(k));
  }
  if (k > 32 * words) {
    throw ConfigError("k=" + std::to_string(k) + " does not fit in " +
                      std::to_string(words) + " packed word(s)");
  }
}

/// Fixed-width 2-bit packed k-mer. Word 0 holds the leftmost 32 bases; bases
/// are left-aligned within the word sequence and unused low bits are zero.
template <std::size_t W>
struct PackedKmer {
  static_assert(W == 1 || W == 2, "k-mers are capped at 63 bases (two words)");
  static constexpr std::size_t kWords = W;

  std::array<std::uint64_t, W> words{};

  friend constexpr auto operator<=>(const PackedKmer&, const PackedKmer&) = default;
  friend constexpr bool operator==(const PackedKmer&, const PackedKmer&) = default;

  // Byte d of the key, d = 0 being the most significant.
  constexpr std::uint8_t key_byte(std::size_t d) const {
    return static_cast<std::uint8_t>(words[d >> 3] >> (56 - 8 * (d & 7)));
  }
};

/// Right-aligned integer value of the first 2k bits (the base string read as a
/// base-4 number).
template <std::size_t W>
constexpr u128 kmer_value(const PackedKmer<W>& km, unsigned k) {
  u128 aligned = static_cast<u128>(km.words[0]) << 64;
  if constexpr (W == 2) aligned |= km.words[1];
  return aligned >> (128 - 2 * k);
}

template <std::size_t W>
constexpr PackedKmer<W> kmer_from_value(u128 value, unsigned k) {
  const u128 aligned = value << (128 - 2 * k);
  PackedKmer<W> km;
  km.words[0] = static_cast<std::uint64_t>(aligned >> 64);
  if constexpr (W == 2) km.words[1] = static_cast<std::uint64_t>(aligned);
  return km;
}

template <std::size_t W>
PackedKmer<W> pack_kmer(std::string_view bases, unsigned k) {
  check_k(k, W);
  if (bases.size() != k) {
    throw ConfigError("pack_kmer: slice length " + std::to_string(bases.size()) +
                      " != k=" + std::to_string(k));
  }
  u128 v = 0;
  for (char b : bases) v = (v << 2) | encode_base(b);
  return kmer_from_value<W>(v, k);
}

template <std::size_t W>
std::string unpack_kmer(const PackedKmer<W>& km, unsigned k) {
  std::string s(k, 'A');
  for (unsigned i = 0; i < k; ++i) {
    const std::uint64_t word = km.words[i / 32];
    s[i] = decode_base(static_cast<std::uint8_t>(word >> (62 - 2 * (i % 32))));
  }
  return s;
}

/// Reverse complement of a right-aligned 2-bit value of `len` bases.
// Complements every base and reverses the order of the 2-bit groups of a
// 64-bit word.
constexpr std::uint64_t revcomp_word(std::uint64_t x) {
  x = ~x;
  x = ((x >> 2) & 0x3333333333333333ULL) | ((x & 0x3333333333333333ULL) << 2);
  x = ((x >> 4) & 0x0F0F0F0F0F0F0F0FULL) | ((x & 0x0F0F0F0F0F0F0F0FULL) << 4);
  return __builtin_bswap64(x);
}

constexpr u128 revcomp_value(u128 v, unsigned len) {
  if (len == 0) return 0;
  const u128 full = (static_cast<u128>(revcomp_word(static_cast<std::uint64_t>(v))) << 64) |
                    revcomp_word(static_cast<std::uint64_t>(v >> 64));
  return full >> (128 - 2 * len);
}

constexpr std::uint64_t revcomp_mmer(std::uint64_t v, unsigned m) {
  return m == 0 ? 0 : revcomp_word(v) >> (64 - 2 * m);
}

template <std::size_t W>
constexpr PackedKmer<W> reverse_complement(const PackedKmer<W>& km, unsigned k) {
  return kmer_from_value<W>(revcomp_value(kmer_value(km, k), k), k);
}

template <std::size_t W>
constexpr PackedKmer<W> canonical(const PackedKmer<W>& km, unsigned k) {
  const auto rc = reverse_complement(km, k);
  return rc < km ? rc : km;
}

struct Read {
  std::uint32_t id = 0;
  std::string bases;

  std::size_t length() const { return bases.size(); }
};

/// Provenance of one k-mer instance.
struct Extension {
  std::uint32_t read_id = 0;
  std::uint32_t pos_in_read = 0;

  friend constexpr auto operator<=>(const Extension&, const Extension&) = default;
  friend constexpr bool operator==(const Extension&, const Extension&) = default;
};

template <std::size_t W>
struct KmerInstance {
  PackedKmer<W> kmer;
  Extension ext;

  friend bool operator==(const KmerInstance&, const KmerInstance&) = default;
};

/// Rolling forward/reverse-complement window over a stream of base codes.
class KmerRoller {
 public:
  explicit KmerRoller(unsigned k)
      : k_(k), mask_((static_cast<u128>(1) << (2 * k)) - 1), rc_shift_(2 * (k - 1)) {}

  void push(std::uint8_t code) {
    fwd_ = ((fwd_ << 2) | code) & mask_;
    rc_ = (rc_ >> 2) | (static_cast<u128>(3u - code) << rc_shift_);
    ++filled_;
  }

  bool full() const { return filled_ >= k_; }
  u128 forward() const { return fwd_; }
  u128 reverse() const { return rc_; }
  u128 canonical() const { return rc_ < fwd_ ? rc_ : fwd_; }

 private:
  unsigned k_;
  u128 mask_;
  unsigned rc_shift_;
  u128 fwd_ = 0;
  u128 rc_ = 0;
  std::size_t filled_ = 0;
};

/// Calls fn(kmer, window_start) for every k-mer of `bases`, left to right.
/// `bases` must be pure ACGT.
template <std::size_t W, class Fn>
void for_each_kmer(std::string_view bases, unsigned k, bool canonical_mode, Fn&& fn) {
  if (bases.size() < k) return;
  KmerRoller roll(k);
  for (std::size_t i = 0; i < bases.size(); ++i) {
    roll.push(kBaseCode[static_cast<unsigned char>(bases[i])]);
    if (roll.full()) {
      const u128 v = canonical_mode ? roll.canonical() : roll.forward();
      fn(kmer_from_value<W>(v, k), static_cast<std::uint32_t>(i + 1 - k));
    }
  }
}

/// All k-mers of a read with their extensions. Reads shorter than k yield
/// nothing.
template <std::size_t W>
std::vector<KmerInstance<W>> kmers_of_read(const Read& r, unsigned k,
                                           bool canonical_mode = false) {
  check_k(k, W);
  std::vector<KmerInstance<W>> out;
  if (r.length() < k) return out;
  out.reserve(r.length() - k + 1);
  for_each_kmer<W>(r.bases, k, canonical_mode,
                   [&](const PackedKmer<W>& km, std::uint32_t pos) {
                     out.push_back({km, Extension{r.id, pos}});
                   });
  return out;
}

}  // namespace hysortk
