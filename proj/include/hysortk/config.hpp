#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "hysortk/errors.hpp"
#include "hysortk/exchange.hpp"
#include "hysortk/minimizer.hpp"
#include "hysortk/sortcount.hpp"
#include "hysortk/task.hpp"
#include "hysortk/wire.hpp"

namespace hysortk {

// m = k/2 for smaller k, constant 23 for larger k.
constexpr unsigned default_m(unsigned k) { return k < 46 ? k / 2 : 23; }

inline constexpr std::uint64_t kUnlimitedMemory = std::numeric_limits<std::uint64_t>::max();

struct RunConfig {
  unsigned k = 31;
  unsigned m = 0;  // 0 selects default_m(k)
  std::uint32_t ranks = 4;
  std::uint32_t workers_per_rank = 2;
  std::uint32_t threads_per_worker = 4;
  std::uint32_t tasks_per_worker = 3;
  std::size_t batch_size = kDefaultBatchSize;
  std::uint64_t lower = 2;
  std::uint64_t upper = 50;
  std::uint64_t seed = kDefaultSeed;
  bool canonical = false;
  bool extensions = false;
  double heavy_factor = kDefaultHeavyFactor;
  SorterChoice sorter = SorterChoice::automatic;
  std::uint64_t memory_budget = kUnlimitedMemory;
  bool overlap = true;

  std::vector<std::string> inputs;
  std::string out_histogram;
  std::string out_dump;
  std::string out_report;

  unsigned effective_m() const { return m == 0 ? default_m(k) : m; }

  std::uint32_t num_tasks() const {
    return task_count(ranks, workers_per_rank, tasks_per_worker);
  }

  std::size_t words() const { return words_for(k); }

  // Longest supermer that still fits one batch as the first record.
  std::uint32_t max_record_bases() const {
    const std::size_t usable = usable_batch_bytes(batch_size);
    const std::size_t overhead = 2 + (extensions ? kFullExtensionBytes : 0);
    if (usable <= overhead) return 0;
    const std::size_t bases = (usable - overhead) * 4;
    return static_cast<std::uint32_t>(std::min<std::size_t>(bases, kMaxSupermerLen));
  }

  void validate() const {
    if (k < 2 || k > kMaxK) throw ConfigError("--k must be in [2, 63]");
    check_km(k, effective_m());
    if (ranks == 0) throw ConfigError("--ranks must be >= 1");
    if (workers_per_rank == 0) throw ConfigError("--workers-per-rank must be >= 1");
    if (threads_per_worker == 0) throw ConfigError("--threads-per-worker must be >= 1");
    if (tasks_per_worker == 0) throw ConfigError("--tasks-per-worker must be >= 1");
    (void)num_tasks();
    if (lower > upper) throw ConfigError("--lower must be <= --upper");
    if (!(heavy_factor > 1.0)) throw ConfigError("--heavy-factor must be > 1");
    if (max_record_bases() < k) {
      throw ConfigError("--batch-size " + std::to_string(batch_size) +
                        " cannot hold a single k-mer record");
    }
    if (usable_batch_bytes(batch_size) < 8 * words() + 4) {
      throw ConfigError("--batch-size " + std::to_string(batch_size) +
                        " cannot hold a kmerlist record");
    }
  }
};

}  // namespace hysortk
