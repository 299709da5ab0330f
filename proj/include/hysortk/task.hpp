#pragma once

// Task abstraction layer: k-mers are partitioned into s independent tasks
// (s = ranks x workers per rank x tasks per worker). Tasks are the unit of
// assignment to ranks, of heavy-hitter detection and of sorting.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "hysortk/errors.hpp"
#include "hysortk/sortcount.hpp"
#include "hysortk/supermer.hpp"
#include "hysortk/wire.hpp"

namespace hysortk {

inline constexpr double kAssignGrowth = 1.1;
inline constexpr double kDefaultHeavyFactor = 4.0;

struct TaskDescriptor {
  std::uint32_t task_id = 0;
  std::uint64_t size_bytes = 0;
  std::uint32_t owner_rank = 0;
  bool heavy = false;
};

inline std::uint32_t task_count(std::uint32_t ranks, std::uint32_t workers_per_rank,
                                std::uint32_t tasks_per_worker) {
  const std::uint64_t s = std::uint64_t{ranks} * workers_per_rank * tasks_per_worker;
  if (s == 0 || s > std::numeric_limits<std::uint32_t>::max()) {
    throw ConfigError("invalid task count " + std::to_string(s));
  }
  return static_cast<std::uint32_t>(s);
}

/// Root-side reduction of every rank's per-task byte counts.
inline std::vector<std::uint64_t> gather_task_sizes(
    const std::vector<std::vector<std::uint64_t>>& per_rank, std::size_t s) {
  std::vector<std::uint64_t> total(s, 0);
  for (std::size_t r = 0; r < per_rank.size(); ++r) {
    if (per_rank[r].size() != s) {
      throw InternalError("rank " + std::to_string(r) + " reported " +
                          std::to_string(per_rank[r].size()) + " task sizes, expected " +
                          std::to_string(s));
    }
    for (std::size_t t = 0; t < s; ++t) total[t] += per_rank[r][t];
  }
  return total;
}

struct Assignment {
  std::vector<std::uint32_t> owner;  // task -> rank
  std::vector<std::uint64_t> loads;  // rank -> bytes
  double threshold = 0;
  unsigned attempts = 0;

  std::uint64_t max_load() const {
    return loads.empty() ? 0 : *std::max_element(loads.begin(), loads.end());
  }
};

/// Greedy threshold assignment: tasks in descending size are placed first-fit
/// under a load threshold that starts at max(ceil(total/R), largest task) and
/// grows by 10% after every failed attempt.
inline Assignment assign_tasks(std::span<const std::uint64_t> sizes, std::uint32_t ranks) {
  if (ranks == 0) throw ConfigError("rank count must be >= 1");
  const std::size_t s = sizes.size();
  std::vector<std::uint32_t> order(s);
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::uint32_t a, std::uint32_t b) { return sizes[a] > sizes[b]; });

  const std::uint64_t total = std::accumulate(sizes.begin(), sizes.end(), std::uint64_t{0});
  const std::uint64_t largest = s ? sizes[order[0]] : 0;
  const std::uint64_t avg = (total + ranks - 1) / ranks;

  Assignment a;
  a.owner.assign(s, 0);
  a.threshold = static_cast<double>(std::max(avg, largest));
  while (true) {
    ++a.attempts;
    a.loads.assign(ranks, 0);
    bool ok = true;
    for (std::uint32_t t : order) {
      std::uint32_t r = 0;
      while (r < ranks && static_cast<double>(a.loads[r] + sizes[t]) > a.threshold) ++r;
      if (r == ranks) {
        ok = false;
        break;
      }
      a.owner[t] = r;
      a.loads[r] += sizes[t];
    }
    if (ok) return a;
    a.threshold *= kAssignGrowth;
  }
}

/// A task is heavy when its size exceeds factor x the mean task size.
inline std::vector<bool> detect_heavy_hitters(std::span<const std::uint64_t> sizes,
                                              double factor) {
  if (!(factor > 1.0)) throw ConfigError("heavy-hitter factor must be > 1");
  std::vector<bool> heavy(sizes.size(), false);
  if (sizes.empty() || std::isinf(factor)) return heavy;
  const long double total = std::accumulate(sizes.begin(), sizes.end(), 0.0L);
  const long double threshold = factor * (total / sizes.size());
  for (std::size_t t = 0; t < sizes.size(); ++t) heavy[t] = sizes[t] > threshold;
  return heavy;
}

/// Longest-task-first scheduling of a rank's tasks onto its workers. Returns
/// the task ids per worker, each list in descending size.
inline std::vector<std::vector<std::uint32_t>> schedule_workers(
    std::span<const std::uint32_t> tasks, std::span<const std::uint64_t> sizes,
    std::uint32_t workers) {
  if (workers == 0) throw ConfigError("workers per rank must be >= 1");
  std::vector<std::uint32_t> order(tasks.begin(), tasks.end());
  std::stable_sort(order.begin(), order.end(),
                   [&](std::uint32_t a, std::uint32_t b) { return sizes[a] > sizes[b]; });
  std::vector<std::vector<std::uint32_t>> out(workers);
  std::vector<std::uint64_t> load(workers, 0);
  for (std::uint32_t t : order) {
    const auto w = static_cast<std::size_t>(
        std::min_element(load.begin(), load.end()) - load.begin());
    out[w].push_back(t);
    load[w] += sizes[t];
  }
  return out;
}

/// Local pre-aggregation of a heavy task: expand, sort, run-length count.
/// Output keys are strictly increasing.
template <std::size_t W>
std::vector<KmerCount<W>> kmerlist_transform(std::span<const Supermer> supermers, unsigned k,
                                             bool canonical_mode, unsigned threads = 1) {
  std::vector<PackedKmer<W>> kmers;
  std::size_t n = 0;
  for (const auto& sm : supermers) n += sm.len >= k ? sm.len - k + 1 : 0;
  kmers.reserve(n);
  for (const auto& sm : supermers) {
    for_each_supermer_kmer<W>(sm, k, canonical_mode,
                              [&](const PackedKmer<W>& km, Extension) { kmers.push_back(km); });
  }
  sort_inplace(std::span<PackedKmer<W>>(kmers), key_bytes_for(k), threads);
  std::vector<KmerCount<W>> out;
  for (std::size_t i = 0; i < kmers.size();) {
    std::size_t j = i;
    while (j < kmers.size() && kmers[j] == kmers[i]) ++j;
    // Counts above u32 range are emitted as several records.
    std::uint64_t c = j - i;
    while (c > 0) {
      const auto part = static_cast<std::uint32_t>(
          std::min<std::uint64_t>(c, std::numeric_limits<std::uint32_t>::max()));
      out.push_back({kmers[i], part});
      c -= part;
    }
    i = j;
  }
  return out;
}

/// Concatenate received kmerlists, sort by k-mer and sum equal keys.
template <std::size_t W>
std::vector<CountedKmer<W>> merge_kmerlists(const std::vector<std::vector<KmerCount<W>>>& streams,
                                            unsigned k, unsigned threads = 1) {
  std::vector<KmerCount<W>> all;
  std::size_t n = 0;
  for (const auto& s : streams) n += s.size();
  all.reserve(n);
  for (const auto& s : streams) all.insert(all.end(), s.begin(), s.end());
  sort_inplace(std::span<KmerCount<W>>(all), key_bytes_for(k), threads);
  std::vector<CountedKmer<W>> out;
  for (const auto& r : all) {
    if (!out.empty() && out.back().kmer == r.kmer) {
      out.back().count += r.count;
    } else {
      out.push_back({r.kmer, r.count});
    }
  }
  return out;
}

}  // namespace hysortk
