#pragma once

// End-to-end counting over R simulated ranks:
//   prepare   reads -> supermers per rank, task sizes, root assignment,
//             heavy-task kmerlist transform
//   exchange  supermer rounds, then kmerlist rounds
//   count     per-task radix sort + linear scan on each rank's workers
// followed by a global merge of the per-task histograms.

#include <chrono>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <span>
#include <thread>
#include <type_traits>
#include <vector>

#include "hysortk/config.hpp"
#include "hysortk/exchange.hpp"
#include "hysortk/fasta.hpp"
#include "hysortk/minimizer.hpp"
#include "hysortk/sortcount.hpp"
#include "hysortk/supermer.hpp"
#include "hysortk/task.hpp"
#include "hysortk/wire.hpp"

namespace hysortk {

struct StageTimes {
  double io_s = 0;
  double prepare_s = 0;
  double exchange_s = 0;
  double count_s = 0;
};

struct RunReport {
  std::uint64_t reads = 0;
  std::uint64_t reads_skipped = 0;  // shorter than k
  std::uint64_t bases = 0;
  std::uint64_t kmer_instances = 0;
  std::uint64_t supermers = 0;
  std::uint64_t supermer_splits = 0;
  std::uint64_t supermer_payload_bytes = 0;  // len field + packed bases, all supermers
  std::vector<std::uint64_t> rank_bases;
  ExchangeStats supermer_exchange;
  ExchangeStats kmerlist_exchange;
  std::vector<TaskDescriptor> tasks;
  double assign_threshold = 0;
  unsigned assign_attempts = 0;
  std::vector<std::uint64_t> rank_loads;
  std::uint64_t inplace_sorts = 0;
  std::uint64_t outofplace_sorts = 0;
  std::uint64_t distinct_kmers = 0;
  std::uint64_t filtered_kmers = 0;
  StageTimes times;
};

template <std::size_t W>
struct RunResult {
  Histogram<W> histogram;
  RunReport report;
};

namespace detail {

class Stopwatch {
 public:
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

// Runs fn(i) for i in [0, n) on separate threads; rethrows the first error.
template <class Fn>
void run_each(std::size_t n, Fn&& fn) {
  if (n <= 1) {
    if (n == 1) fn(std::size_t{0});
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> pool;
  pool.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    pool.emplace_back([&, i] {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

template <std::size_t W>
PackedKmer<W> first_kmer(const Supermer& sm, unsigned k) {
  u128 v = 0;
  for (unsigned i = 0; i < k; ++i) v = (v << 2) | sm.code_at(i);
  return kmer_from_value<W>(v, k);
}

inline std::uint64_t supermer_size_bytes(const Supermer& sm) { return 2 + (sm.len + 3) / 4; }

}  // namespace detail

/// Counts every k-mer of `reads` exactly once under `cfg`.
template <std::size_t W>
RunResult<W> run_pipeline(const RunConfig& cfg, const std::vector<Read>& reads) {
  cfg.validate();
  if (cfg.words() != W) throw ConfigError("k does not match the packed word count");

  const unsigned k = cfg.k;
  const unsigned m = cfg.effective_m();
  const std::uint32_t R = cfg.ranks;
  const std::uint32_t s = cfg.num_tasks();
  const HashScorer scorer{cfg.seed, cfg.canonical};
  const std::uint32_t max_bases = cfg.max_record_bases();
  const bool heavy_path = !cfg.extensions;

  RunResult<W> result;
  RunReport& rep = result.report;
  detail::Stopwatch clock;

  // ---- prepare -------------------------------------------------------------
  const auto parts = partition_reads(reads, R);
  std::vector<std::vector<Supermer>> local(R);  // per rank, production order
  std::vector<std::vector<std::uint64_t>> local_sizes(R, std::vector<std::uint64_t>(s, 0));
  std::vector<std::uint64_t> skipped(R, 0), splits(R, 0), instances(R, 0);
  rep.rank_bases.assign(R, 0);

  detail::run_each(R, [&](std::size_t r) {
    std::vector<ScoredMmer> mins;
    MinimizerWindow window;
    std::vector<Supermer> tmp;
    for (std::size_t idx : parts[r]) {
      const Read& rd = reads[idx];
      rep.rank_bases[r] += rd.length();
      if (rd.length() < k) {
        ++skipped[r];
        continue;
      }
      instances[r] += rd.length() - k + 1;
      minimizers_of_bases(rd.bases, k, m, scorer, mins, window);
      tmp.clear();
      supermers_from_minimizers(rd, k, mins, s, tmp);
      for (auto& sm : tmp) {
        if (sm.len > max_bases) {
          auto pieces = split_supermer(sm, max_bases, k);
          splits[r] += pieces.size() - 1;
          for (auto& p : pieces) {
            local_sizes[r][p.dest_task] += detail::supermer_size_bytes(p);
            local[r].push_back(std::move(p));
          }
        } else {
          local_sizes[r][sm.dest_task] += detail::supermer_size_bytes(sm);
          local[r].push_back(std::move(sm));
        }
      }
    }
  });

  for (std::uint32_t r = 0; r < R; ++r) {
    rep.reads += parts[r].size();
    rep.reads_skipped += skipped[r];
    rep.supermer_splits += splits[r];
    rep.kmer_instances += instances[r];
    rep.supermers += local[r].size();
    rep.bases += rep.rank_bases[r];
  }

  const auto sizes = gather_task_sizes(local_sizes, s);
  for (auto b : sizes) rep.supermer_payload_bytes += b;
  const Assignment assignment = assign_tasks(sizes, R);
  const std::vector<bool> heavy =
      heavy_path ? detect_heavy_hitters(sizes, cfg.heavy_factor) : std::vector<bool>(s, false);
  rep.assign_threshold = assignment.threshold;
  rep.assign_attempts = assignment.attempts;
  rep.rank_loads = assignment.loads;
  rep.tasks.resize(s);
  for (std::uint32_t t = 0; t < s; ++t) {
    rep.tasks[t] = TaskDescriptor{t, sizes[t], assignment.owner[t], heavy[t]};
  }

  RankQueues<Supermer> sm_queues(R, std::vector<std::vector<Outgoing<Supermer>>>(R));
  RankQueues<KmerCount<W>> kl_queues(R, std::vector<std::vector<Outgoing<KmerCount<W>>>>(R));
  detail::run_each(R, [&](std::size_t r) {
    std::vector<std::vector<Supermer>> heavy_local;
    for (auto& sm : local[r]) {
      const std::uint32_t t = sm.dest_task;
      if (heavy[t]) {
        if (heavy_local.empty()) heavy_local.resize(s);
        heavy_local[t].push_back(std::move(sm));
      } else {
        sm_queues[r][assignment.owner[t]].push_back({std::move(sm), t});
      }
    }
    local[r].clear();
    local[r].shrink_to_fit();
    for (std::uint32_t t = 0; t < heavy_local.size(); ++t) {
      if (heavy_local[t].empty()) continue;
      const auto list = kmerlist_transform<W>(heavy_local[t], k, cfg.canonical,
                                              cfg.threads_per_worker);
      auto& q = kl_queues[r][assignment.owner[t]];
      for (const auto& rec : list) q.push_back({rec, t});
    }
  });
  rep.times.prepare_s = clock.lap();

  // ---- exchange ------------------------------------------------------------
  const SupermerCodec sm_codec(k, cfg.extensions);
  const KmerListCodec<W> kl_codec;
  const ExchangeOptions xopts{cfg.overlap, s};
  auto sm_plan = plan_rounds(sm_codec, sm_queues, cfg.batch_size);
  auto sm_recv = run_exchange(sm_codec, sm_queues, sm_plan, xopts);
  sm_queues.clear();
  std::optional<ExchangeResult<KmerCount<W>>> kl_recv;
  bool any_heavy = false;
  for (bool h : heavy) any_heavy = any_heavy || h;
  if (any_heavy) {
    auto kl_plan = plan_rounds(kl_codec, kl_queues, cfg.batch_size);
    kl_recv = run_exchange(kl_codec, kl_queues, kl_plan, xopts);
    rep.kmerlist_exchange = kl_recv->stats;
  }
  kl_queues.clear();
  rep.supermer_exchange = sm_recv.stats;
  rep.times.exchange_s = clock.lap();

  // ---- count ---------------------------------------------------------------
  std::vector<Histogram<W>> rank_hist(R);
  std::vector<std::uint64_t> inplace(R, 0), outofplace(R, 0);
  detail::run_each(R, [&](std::size_t r) {
    // Wire records carry no task id; recover it from the first k-mer.
    std::vector<std::vector<Supermer>> by_task(s);
    for (auto& stream : sm_recv.received[r]) {
      for (auto& sm : stream) {
        const auto mz = minimizer_of_kmer(detail::first_kmer<W>(sm, k), k, m, scorer);
        const std::uint32_t t = destination_task(mz.score, s);
        if (assignment.owner[t] != r || heavy[t]) {
          throw InternalError("supermer for task " + std::to_string(t) + " reached rank " +
                              std::to_string(r));
        }
        by_task[t].push_back(std::move(sm));
      }
      stream.clear();
    }
    // heavy task -> one kmerlist per sender
    std::vector<std::vector<std::vector<KmerCount<W>>>> lists;
    if (kl_recv) {
      lists.resize(s);
      for (auto& stream : kl_recv->received[r]) {
        std::vector<std::vector<KmerCount<W>>*> last(s, nullptr);
        for (const auto& rec : stream) {
          const auto mz = minimizer_of_kmer(rec.kmer, k, m, scorer);
          const std::uint32_t t = destination_task(mz.score, s);
          if (assignment.owner[t] != r || !heavy[t]) {
            throw InternalError("kmerlist for task " + std::to_string(t) + " reached rank " +
                                std::to_string(r));
          }
          if (!last[t]) last[t] = &lists[t].emplace_back();
          last[t]->push_back(rec);
        }
        stream.clear();
      }
    }

    std::vector<std::uint32_t> owned;
    for (std::uint32_t t = 0; t < s; ++t) {
      if (assignment.owner[t] == r) owned.push_back(t);
    }
    const auto plan = schedule_workers(owned, sizes, cfg.workers_per_rank);
    std::vector<Histogram<W>> worker_hist(plan.size());
    std::mutex mu;
    detail::run_each(plan.size(), [&](std::size_t w) {
      for (std::uint32_t t : plan[w]) {
        if (heavy[t]) {
          const auto merged = lists.empty() ? std::vector<CountedKmer<W>>{}
                                            : merge_kmerlists<W>(lists[t], k,
                                                                 cfg.threads_per_worker);
          worker_hist[w].merge(scan_count<W, CountedKmer<W>>(merged, cfg.lower, cfg.upper));
          continue;
        }
        auto count_task = [&](auto& records) {
          const SorterChoice used =
              sort_records(std::span(records), key_bytes_for(k), cfg.sorter,
                           cfg.memory_budget, cfg.threads_per_worker);
          {
            std::lock_guard lock(mu);
            ++(used == SorterChoice::inplace ? inplace[r] : outofplace[r]);
          }
          using Rec = typename std::decay_t<decltype(records)>::value_type;
          worker_hist[w].merge(scan_count<W, Rec>(records, cfg.lower, cfg.upper));
        };
        std::size_t n = 0;
        for (const auto& sm : by_task[t]) n += sm.len - k + 1;
        if (cfg.extensions) {
          std::vector<KmerInstance<W>> recs;
          recs.reserve(n);
          for (const auto& sm : by_task[t]) {
            for_each_supermer_kmer<W>(sm, k, cfg.canonical,
                                      [&](const PackedKmer<W>& km, Extension e) {
                                        recs.push_back({km, e});
                                      });
          }
          by_task[t] = {};
          count_task(recs);
        } else {
          std::vector<PackedKmer<W>> recs;
          recs.reserve(n);
          for (const auto& sm : by_task[t]) {
            for_each_supermer_kmer<W>(sm, k, cfg.canonical,
                                      [&](const PackedKmer<W>& km, Extension) {
                                        recs.push_back(km);
                                      });
          }
          by_task[t] = {};
          count_task(recs);
        }
      }
    });
    for (auto& h : worker_hist) rank_hist[r].merge(std::move(h));
  });

  for (std::uint32_t r = 0; r < R; ++r) {
    result.histogram.merge(std::move(rank_hist[r]));
    rep.inplace_sorts += inplace[r];
    rep.outofplace_sorts += outofplace[r];
  }
  result.histogram.sort_filtered();
  rep.distinct_kmers = result.histogram.distinct();
  rep.filtered_kmers = result.histogram.filtered.size();
  rep.times.count_s = clock.lap();

  if (result.histogram.instances() != rep.kmer_instances) {
    throw InternalError("counted " + std::to_string(result.histogram.instances()) +
                        " k-mer instances, expected " + std::to_string(rep.kmer_instances));
  }
  return result;
}

}  // namespace hysortk
