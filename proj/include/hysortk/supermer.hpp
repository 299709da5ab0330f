#pragma once

// Supermers: maximal runs of consecutive k-mers that share a destination task.
// Only the run's bases travel, so the k - 1 bases shared by neighbouring
// k-mers are sent once.

#include <algorithm>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "hysortk/minimizer.hpp"
#include "hysortk/seq.hpp"

namespace hysortk {

inline constexpr std::uint32_t kUnknownTask = 0xFFFFFFFFu;

/// A run of bases packed 4 per byte, most significant first (the wire layout).
/// `ext` is the provenance of the first k-mer; k-mer j of the run sits at
/// ext.pos_in_read + j.
struct Supermer {
  std::vector<std::uint8_t> packed;
  std::uint32_t len = 0;
  std::uint32_t dest_task = kUnknownTask;
  Extension ext;

  std::uint8_t code_at(std::size_t i) const {
    return static_cast<std::uint8_t>(packed[i >> 2] >> (6 - 2 * (i & 3))) & 3u;
  }
};

inline std::vector<std::uint8_t> pack_codes(std::string_view bases) {
  std::vector<std::uint8_t> out((bases.size() + 3) / 4, 0);
  for (std::size_t i = 0; i < bases.size(); ++i) {
    const auto c = kBaseCode[static_cast<unsigned char>(bases[i])];
    out[i >> 2] |= static_cast<std::uint8_t>(c << (6 - 2 * (i & 3)));
  }
  return out;
}

inline std::string supermer_bases(const Supermer& sm) {
  std::string s(sm.len, 'A');
  for (std::uint32_t i = 0; i < sm.len; ++i) s[i] = decode_base(sm.code_at(i));
  return s;
}

inline Supermer make_supermer(std::string_view bases, std::uint32_t dest, Extension ext) {
  return Supermer{pack_codes(bases), static_cast<std::uint32_t>(bases.size()), dest, ext};
}

/// Splits a read into supermers from precomputed per-k-mer minimizers.
/// Appends to `out`.
inline void supermers_from_minimizers(const Read& r, unsigned k,
                                      const std::vector<ScoredMmer>& minimizers,
                                      std::uint32_t s, std::vector<Supermer>& out) {
  const std::size_t n = minimizers.size();
  std::size_t start = 0;
  std::uint32_t dest = n ? destination_task(minimizers[0].score, s) : 0;
  for (std::size_t i = 1; i <= n; ++i) {
    const std::uint32_t d = i < n ? destination_task(minimizers[i].score, s) : dest;
    if (i == n || d != dest) {
      const std::string_view run(r.bases.data() + start, i - start + k - 1);
      out.push_back(make_supermer(run, dest, Extension{r.id, static_cast<std::uint32_t>(start)}));
      start = i;
      dest = d;
    }
  }
}

template <class Scorer = HashScorer>
std::vector<Supermer> supermers_of_read(const Read& r, unsigned k, unsigned m, std::uint32_t s,
                                        const Scorer& scorer = Scorer{}) {
  if (s == 0) throw ConfigError("task count must be >= 1");
  std::vector<Supermer> out;
  if (r.length() < k) return out;
  const auto minimizers = minimizers_of_read(r, k, m, scorer);
  supermers_from_minimizers(r, k, minimizers, s, out);
  return out;
}

/// Calls fn(kmer, ext) for every k-mer of the supermer.
template <std::size_t W, class Fn>
void for_each_supermer_kmer(const Supermer& sm, unsigned k, bool canonical_mode, Fn&& fn) {
  if (sm.len < k) {
    throw WireError("malformed supermer: len " + std::to_string(sm.len) + " < k " +
                    std::to_string(k));
  }
  KmerRoller roll(k);
  for (std::uint32_t i = 0; i < sm.len; ++i) {
    roll.push(sm.code_at(i));
    if (roll.full()) {
      const u128 v = canonical_mode ? roll.canonical() : roll.forward();
      const std::uint32_t j = i + 1 - k;
      fn(kmer_from_value<W>(v, k), Extension{sm.ext.read_id, sm.ext.pos_in_read + j});
    }
  }
}

template <std::size_t W>
std::vector<KmerInstance<W>> expand_supermer(const Supermer& sm, unsigned k,
                                             bool canonical_mode = false) {
  std::vector<KmerInstance<W>> out;
  if (sm.len >= k) out.reserve(sm.len - k + 1);
  for_each_supermer_kmer<W>(sm, k, canonical_mode,
                            [&](const PackedKmer<W>& km, Extension e) { out.push_back({km, e}); });
  return out;
}

/// Splits a supermer into pieces of at most `max_len` bases. Neighbouring
/// pieces overlap by k - 1 bases, so every k-mer lands in exactly one piece.
inline std::vector<Supermer> split_supermer(const Supermer& sm, std::uint32_t max_len,
                                            unsigned k) {
  if (max_len < k) {
    throw ConfigError("supermer split length " + std::to_string(max_len) + " is below k");
  }
  if (sm.len <= max_len) return {sm};
  const std::string bases = supermer_bases(sm);
  std::vector<Supermer> out;
  std::uint32_t start = 0;
  while (true) {
    const std::uint32_t piece = std::min<std::uint32_t>(max_len, sm.len - start);
    out.push_back(make_supermer(std::string_view(bases).substr(start, piece), sm.dest_task,
                                Extension{sm.ext.read_id, sm.ext.pos_in_read + start}));
    if (start + piece == sm.len) break;
    start += piece - (k - 1);
  }
  return out;
}

}  // namespace hysortk
