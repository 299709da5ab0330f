#pragma once

// Radix sorting of packed k-mer records and linear-scan counting.
//
// Two backends share one ordering contract (ascending k-mer words):
//   sort_inplace     MSD radix, 8-bit digits, American-flag cycle permutation.
//                    Auxiliary memory is a few 256-entry tables per recursion
//                    level, independent of n.
//   sort_outofplace  LSD radix, 8-bit digits, ping-pong with an n-sized
//                    auxiliary array. Faster, needs twice the memory.

#include <algorithm>
#include <array>
#include <atomic>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <thread>
#include <type_traits>
#include <vector>

#include "hysortk/seq.hpp"
#include "hysortk/wire.hpp"

namespace hysortk {

/// (k-mer, total count) after counting.
template <std::size_t W>
struct CountedKmer {
  PackedKmer<W> kmer;
  std::uint64_t count = 0;

  friend bool operator==(const CountedKmer&, const CountedKmer&) = default;
};

template <std::size_t W>
constexpr const PackedKmer<W>& sort_key(const PackedKmer<W>& km) { return km; }

template <class Rec>
  requires requires(const Rec& r) { r.kmer; }
constexpr const auto& sort_key(const Rec& r) { return r.kmer; }

template <class Rec>
constexpr std::uint64_t instance_count(const Rec& r) {
  if constexpr (requires { r.count; }) {
    return r.count;
  } else {
    return 1;
  }
}

enum class SorterChoice { automatic, inplace, outofplace };

inline const char* to_string(SorterChoice c) {
  switch (c) {
    case SorterChoice::inplace: return "inplace";
    case SorterChoice::outofplace: return "outofplace";
    default: return "auto";
  }
}

namespace detail {

inline constexpr std::size_t kInsertionCutoff = 32;
inline constexpr std::size_t kParallelCutoff = std::size_t{1} << 14;

template <class Rec>
void insertion_sort(std::span<Rec> a) {
  for (std::size_t i = 1; i < a.size(); ++i) {
    Rec x = a[i];
    std::size_t j = i;
    while (j > 0 && sort_key(x) < sort_key(a[j - 1])) {
      a[j] = a[j - 1];
      --j;
    }
    a[j] = x;
  }
}

using Bounds = std::array<std::size_t, 257>;

// One American-flag pass on `digit`. Returns false when every record falls in
// a single bucket (nothing moved).
template <class Rec>
bool flag_pass(std::span<Rec> a, std::size_t digit, Bounds& bounds) {
  std::array<std::size_t, 256> count{};
  for (const auto& r : a) ++count[sort_key(r).key_byte(digit)];
  bounds[0] = 0;
  for (std::size_t b = 0; b < 256; ++b) {
    if (count[b] == a.size()) return false;
    bounds[b + 1] = bounds[b] + count[b];
  }
  std::array<std::size_t, 256> head;
  std::copy_n(bounds.begin(), 256, head.begin());
  for (std::size_t b = 0; b < 256; ++b) {
    while (head[b] < bounds[b + 1]) {
      const std::uint8_t d = sort_key(a[head[b]]).key_byte(digit);
      if (d == b) {
        ++head[b];
      } else {
        std::swap(a[head[b]], a[head[d]++]);
      }
    }
  }
  return true;
}

template <class Rec>
void msd_sort(std::span<Rec> a, std::size_t digit, std::size_t ndigits) {
  Bounds bounds;
  while (true) {
    if (a.size() <= kInsertionCutoff) {
      insertion_sort(a);
      return;
    }
    if (digit >= ndigits) return;
    if (flag_pass(a, digit, bounds)) break;
    ++digit;
  }
  for (std::size_t b = 0; b < 256; ++b) {
    const std::size_t n = bounds[b + 1] - bounds[b];
    if (n > 1) msd_sort(a.subspan(bounds[b], n), digit + 1, ndigits);
  }
}

template <class Fn>
void parallel_for_threads(unsigned threads, Fn&& fn) {
  if (threads <= 1) {
    fn(0u);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads - 1);
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(fn, t);
  fn(0u);
  for (auto& th : pool) th.join();
}

}  // namespace detail

/// In-place MSD radix sort on the first `key_bytes` bytes of the k-mer key.
/// With threads > 1, the top-level buckets are shared among the threads.
template <class Rec>
void sort_inplace(std::span<Rec> a, std::size_t key_bytes, unsigned threads = 1) {
  if (threads <= 1 || a.size() < detail::kParallelCutoff) {
    detail::msd_sort(a, 0, key_bytes);
    return;
  }
  detail::Bounds bounds;
  std::size_t digit = 0;
  while (digit < key_bytes && !detail::flag_pass(a, digit, bounds)) ++digit;
  if (digit >= key_bytes) return;

  // Largest buckets first.
  std::array<std::uint16_t, 256> order;
  for (std::size_t b = 0; b < 256; ++b) order[b] = static_cast<std::uint16_t>(b);
  std::sort(order.begin(), order.end(), [&](std::uint16_t x, std::uint16_t y) {
    return bounds[x + 1] - bounds[x] > bounds[y + 1] - bounds[y];
  });
  std::atomic<std::size_t> next{0};
  detail::parallel_for_threads(threads, [&](unsigned) {
    for (std::size_t i = next++; i < 256; i = next++) {
      const std::size_t b = order[i];
      const std::size_t n = bounds[b + 1] - bounds[b];
      if (n > 1) detail::msd_sort(a.subspan(bounds[b], n), digit + 1, key_bytes);
    }
  });
}

/// Out-of-place LSD radix sort. Stable.
template <class Rec>
void sort_outofplace(std::span<Rec> a, std::size_t key_bytes, unsigned threads = 1) {
  const std::size_t n = a.size();
  if (n < 2) return;
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(
                                                         (n + detail::kParallelCutoff - 1) /
                                                         detail::kParallelCutoff)));
  std::vector<Rec> aux(n);
  Rec* src = a.data();
  Rec* dst = aux.data();
  std::vector<std::array<std::size_t, 256>> counts(threads);
  const std::size_t chunk = (n + threads - 1) / threads;

  for (std::size_t d = key_bytes; d-- > 0;) {
    detail::parallel_for_threads(threads, [&](unsigned t) {
      auto& c = counts[t];
      c.fill(0);
      const std::size_t lo = std::min(n, t * chunk), hi = std::min(n, lo + chunk);
      for (std::size_t i = lo; i < hi; ++i) ++c[sort_key(src[i]).key_byte(d)];
    });
    bool trivial = false;
    std::size_t run = 0;
    for (std::size_t b = 0; b < 256 && !trivial; ++b) {
      std::size_t total = 0;
      for (unsigned t = 0; t < threads; ++t) total += counts[t][b];
      trivial = total == n;
    }
    if (trivial) continue;
    for (std::size_t b = 0; b < 256; ++b) {
      for (unsigned t = 0; t < threads; ++t) {
        const std::size_t c = counts[t][b];
        counts[t][b] = run;
        run += c;
      }
    }
    detail::parallel_for_threads(threads, [&](unsigned t) {
      auto& off = counts[t];
      const std::size_t lo = std::min(n, t * chunk), hi = std::min(n, lo + chunk);
      for (std::size_t i = lo; i < hi; ++i) dst[off[sort_key(src[i]).key_byte(d)]++] = src[i];
    });
    std::swap(src, dst);
  }
  if (src != a.data()) std::copy(src, src + n, a.data());
}

inline constexpr std::uint64_t kSorterSlackPercent = 10;

/// Out-of-place needs the live array plus an equal auxiliary array, plus
/// slack. Anything less falls back to in-place.
inline SorterChoice select_sorter(std::size_t n, std::size_t record_width,
                                  std::uint64_t memory_budget,
                                  SorterChoice override_choice = SorterChoice::automatic) {
  if (override_choice != SorterChoice::automatic) return override_choice;
  const unsigned __int128 live = static_cast<unsigned __int128>(2) * n * record_width;
  const unsigned __int128 need = live + (live * kSorterSlackPercent + 99) / 100;
  return memory_budget >= need ? SorterChoice::outofplace : SorterChoice::inplace;
}

template <class Rec>
SorterChoice sort_records(std::span<Rec> a, std::size_t key_bytes, SorterChoice choice,
                          std::uint64_t memory_budget, unsigned threads) {
  const SorterChoice used = select_sorter(a.size(), sizeof(Rec), memory_budget, choice);
  if (used == SorterChoice::outofplace) {
    sort_outofplace(a, key_bytes, threads);
  } else {
    sort_inplace(a, key_bytes, threads);
  }
  return used;
}

template <std::size_t W>
struct FilteredKmer {
  PackedKmer<W> kmer;
  std::uint64_t count = 0;
  std::vector<Extension> extensions;  // sorted; empty unless extensions are on

  friend bool operator==(const FilteredKmer&, const FilteredKmer&) = default;
};

/// Frequency -> number of distinct k-mers, plus the k-mers whose count lies in
/// [lower, upper].
template <std::size_t W>
struct Histogram {
  std::map<std::uint64_t, std::uint64_t> frequency;
  std::vector<FilteredKmer<W>> filtered;

  std::uint64_t instances() const {
    std::uint64_t n = 0;
    for (const auto& [f, d] : frequency) n += f * d;
    return n;
  }

  std::uint64_t distinct() const {
    std::uint64_t n = 0;
    for (const auto& [f, d] : frequency) n += d;
    return n;
  }

  void merge(Histogram&& other) {
    for (const auto& [f, d] : other.frequency) frequency[f] += d;
    filtered.insert(filtered.end(), std::make_move_iterator(other.filtered.begin()),
                    std::make_move_iterator(other.filtered.end()));
  }

  // Radix-sorts (k-mer, index) pairs, then moves the records into place.
  void sort_filtered() {
    struct Slot {
      PackedKmer<W> kmer;
      std::size_t index;
    };
    std::vector<Slot> slots(filtered.size());
    for (std::size_t i = 0; i < filtered.size(); ++i) slots[i] = {filtered[i].kmer, i};
    sort_inplace(std::span<Slot>(slots), 8 * W);
    std::vector<FilteredKmer<W>> out;
    out.reserve(filtered.size());
    for (const auto& s : slots) out.push_back(std::move(filtered[s.index]));
    filtered = std::move(out);
  }
};

/// Run-length counts a sorted record array. Records may carry a `count`
/// (pre-aggregated) and/or an `ext` (provenance carried into the filtered list).
template <std::size_t W, class Rec>
Histogram<W> scan_count(std::span<const Rec> sorted, std::uint64_t lower, std::uint64_t upper) {
  Histogram<W> h;
  // Small frequencies are tallied in an array and folded into the map at the end.
  std::array<std::uint64_t, 256> small{};
  std::size_t i = 0;
  while (i < sorted.size()) {
    const auto& key = sort_key(sorted[i]);
    std::size_t j = i;
    std::uint64_t count = 0;
    while (j < sorted.size() && sort_key(sorted[j]) == key) count += instance_count(sorted[j++]);
    if (count < small.size()) {
      ++small[count];
    } else {
      ++h.frequency[count];
    }
    if (count >= lower && count <= upper) {
      FilteredKmer<W> f{key, count, {}};
      if constexpr (requires { sorted[i].ext; }) {
        f.extensions.reserve(j - i);
        for (std::size_t x = i; x < j; ++x) f.extensions.push_back(sorted[x].ext);
        std::sort(f.extensions.begin(), f.extensions.end());
      }
      h.filtered.push_back(std::move(f));
    }
    i = j;
  }
  for (std::size_t c = 0; c < small.size(); ++c) {
    if (small[c]) h.frequency[c] += small[c];
  }
  return h;
}

}  // namespace hysortk
