#pragma once

// Simulated all-to-all exchange between R in-process ranks.
//
// Every (source, destination) pair sends one fixed-size batch per round, as a
// regular-pattern collective would. Each rank runs three stages per round:
// prepare (encode round n+1 into a send buffer), communicate (move round n),
// and parse (decode round n-1 from a receive buffer). Two send and two
// receive buffer sets alternate between rounds. With overlap enabled the
// three stages run concurrently; without it they run in order. Both modes
// produce the same bytes.

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <future>
#include <utility>
#include <vector>

#include "hysortk/errors.hpp"
#include "hysortk/wire.hpp"

namespace hysortk {

inline constexpr std::size_t kDefaultBatchSize = 80'000;

/// Encoded size of a record as the first in its batch and as the successor
/// of the previous record in the stream.
struct RecordSize {
  std::size_t first = 0;
  std::size_t next = 0;
};

template <class Record>
struct Outgoing {
  Record record;
  std::uint32_t task = 0;
};

template <class Record>
using RankQueues = std::vector<std::vector<std::vector<Outgoing<Record>>>>;  // [src][dst]

struct RoundSchedule {
  std::size_t ranks = 0;
  std::size_t batch_size = 0;
  std::size_t rounds = 0;
  // ranges[src][dst][round] = [begin, end) into that stream's queue.
  std::vector<std::vector<std::vector<std::pair<std::size_t, std::size_t>>>> ranges;
};

struct ExchangeStats {
  std::size_t rounds = 0;
  std::uint64_t payload_bytes = 0;
  std::uint64_t padding_bytes = 0;
  std::uint64_t records = 0;
  std::vector<std::uint64_t> per_destination_bytes;
  std::vector<std::uint64_t> per_task_bytes;

  std::uint64_t total_bytes() const { return payload_bytes + padding_bytes; }

  ExchangeStats& operator+=(const ExchangeStats& o) {
    rounds += o.rounds;
    payload_bytes += o.payload_bytes;
    padding_bytes += o.padding_bytes;
    records += o.records;
    auto add = [](std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b) {
      if (a.size() < b.size()) a.resize(b.size(), 0);
      for (std::size_t i = 0; i < b.size(); ++i) a[i] += b[i];
    };
    add(per_destination_bytes, o.per_destination_bytes);
    add(per_task_bytes, o.per_task_bytes);
    return *this;
  }
};

template <class Record>
struct ExchangeResult {
  std::vector<std::vector<std::vector<Record>>> received;  // [dst][src]
  ExchangeStats stats;
};

struct ExchangeOptions {
  bool overlap = true;
  std::size_t num_tasks = 0;  // sizes per_task_bytes; 0 disables it
};

inline std::size_t usable_batch_bytes(std::size_t batch_size) {
  return batch_size > kSentinelBytes ? batch_size - kSentinelBytes : 0;
}

/// Packs every stream greedily into rounds without splitting records. All
/// ranks run max-over-streams rounds, and at least one.
inline RoundSchedule plan_rounds(const std::vector<std::vector<std::vector<RecordSize>>>& sizes,
                                 std::size_t batch_size) {
  const std::size_t usable = usable_batch_bytes(batch_size);
  RoundSchedule plan;
  plan.ranks = sizes.size();
  plan.batch_size = batch_size;
  plan.rounds = 1;
  plan.ranges.resize(plan.ranks);
  for (std::size_t src = 0; src < plan.ranks; ++src) {
    if (sizes[src].size() != plan.ranks) throw InternalError("ragged rank queues");
    plan.ranges[src].resize(plan.ranks);
    for (std::size_t dst = 0; dst < plan.ranks; ++dst) {
      const auto& stream = sizes[src][dst];
      auto& ranges = plan.ranges[src][dst];
      std::size_t begin = 0;
      std::size_t used = 0;
      for (std::size_t i = 0; i < stream.size(); ++i) {
        if (stream[i].first > usable) {
          throw ConfigError("record of " + std::to_string(stream[i].first) +
                            " bytes exceeds batch size " + std::to_string(batch_size));
        }
        std::size_t need = i == begin ? stream[i].first : stream[i].next;
        if (used + need > usable) {
          ranges.emplace_back(begin, i);
          begin = i;
          used = 0;
          need = stream[i].first;
        }
        used += need;
      }
      if (begin < stream.size()) ranges.emplace_back(begin, stream.size());
      plan.rounds = std::max(plan.rounds, ranges.size());
    }
  }
  for (auto& row : plan.ranges) {
    for (auto& ranges : row) {
      ranges.resize(plan.rounds, {ranges.empty() ? 0 : ranges.back().second,
                                  ranges.empty() ? 0 : ranges.back().second});
    }
  }
  return plan;
}

template <class Codec>
std::vector<RecordSize> measure_stream(const Codec& codec,
                                       const std::vector<Outgoing<typename Codec::record_type>>& q) {
  std::vector<RecordSize> out;
  out.reserve(q.size());
  typename Codec::state_type st{};
  std::vector<std::uint8_t> scratch;
  for (const auto& o : q) {
    const typename Codec::state_type fresh{};
    out.push_back({codec.encoded_size(o.record, fresh), codec.encoded_size(o.record, st)});
    scratch.clear();
    codec.encode(o.record, st, scratch);
  }
  return out;
}

template <class Codec>
RoundSchedule plan_rounds(const Codec& codec,
                          const RankQueues<typename Codec::record_type>& queues,
                          std::size_t batch_size) {
  std::vector<std::vector<std::vector<RecordSize>>> sizes(queues.size());
  for (std::size_t src = 0; src < queues.size(); ++src) {
    for (const auto& q : queues[src]) sizes[src].push_back(measure_stream(codec, q));
  }
  return plan_rounds(sizes, batch_size);
}

template <class Codec>
ExchangeResult<typename Codec::record_type> run_exchange(
    const Codec& codec, const RankQueues<typename Codec::record_type>& queues,
    const RoundSchedule& plan, const ExchangeOptions& opts = {}) {
  using Record = typename Codec::record_type;
  const std::size_t R = plan.ranks;
  const std::size_t B = plan.batch_size;
  if (queues.size() != R) throw InternalError("schedule does not match rank count");

  ExchangeResult<Record> result;
  result.received.assign(R, std::vector<std::vector<Record>>(R));
  auto& stats = result.stats;
  stats.rounds = plan.rounds;
  stats.per_destination_bytes.assign(R, 0);
  stats.per_task_bytes.assign(opts.num_tasks, 0);

  std::vector<std::uint8_t> send[2];
  std::vector<std::uint8_t> recv[2];
  for (int i = 0; i < 2; ++i) {
    send[i].assign(R * R * B, 0);
    recv[i].assign(R * R * B, 0);
  }

  // Only prepare touches `stats`; only parse touches `received`.
  auto prepare = [&](std::size_t round) {
    auto& buf = send[round & 1];
    std::vector<std::uint8_t> payload;
    for (std::size_t src = 0; src < R; ++src) {
      for (std::size_t dst = 0; dst < R; ++dst) {
        payload.clear();
        typename Codec::state_type st{};
        const auto [begin, end] = plan.ranges[src][dst][round];
        for (std::size_t i = begin; i < end; ++i) {
          const auto& o = queues[src][dst][i];
          const std::size_t before = payload.size();
          codec.encode(o.record, st, payload);
          if (o.task < stats.per_task_bytes.size()) {
            stats.per_task_bytes[o.task] += payload.size() - before;
          }
        }
        stats.records += end - begin;
        const auto block = pad_batch(payload, B);
        std::memcpy(buf.data() + (src * R + dst) * B, block.data(), B);
        stats.payload_bytes += payload.size();
        stats.padding_bytes += B - payload.size();
        stats.per_destination_bytes[dst] += payload.size();
      }
    }
  };

  auto communicate = [&](std::size_t round) {
    const auto& from = send[round & 1];
    auto& to = recv[round & 1];
    for (std::size_t src = 0; src < R; ++src) {
      for (std::size_t dst = 0; dst < R; ++dst) {
        std::memcpy(to.data() + (dst * R + src) * B, from.data() + (src * R + dst) * B, B);
      }
    }
  };

  auto parse = [&](std::size_t round) {
    const auto& buf = recv[round & 1];
    for (std::size_t dst = 0; dst < R; ++dst) {
      for (std::size_t src = 0; src < R; ++src) {
        const std::span<const std::uint8_t> block(buf.data() + (dst * R + src) * B, B);
        codec.decode_into(block,
                          StreamId{static_cast<std::uint32_t>(src), static_cast<std::uint32_t>(dst),
                                   static_cast<std::uint32_t>(round)},
                          result.received[dst][src]);
      }
    }
  };

  const std::size_t rounds = plan.rounds;
  if (!opts.overlap) {
    for (std::size_t r = 0; r < rounds; ++r) {
      prepare(r);
      communicate(r);
      parse(r);
    }
    return result;
  }

  // Step t: prepare t, communicate t-1, parse t-2. Buffer sets never clash:
  // prepare writes send[t&1], communicate reads send[(t-1)&1] and writes
  // recv[(t-1)&1], parse reads recv[t&1].
  for (std::size_t t = 0; t < rounds + 2; ++t) {
    std::future<void> prep;
    std::future<void> pars;
    if (t < rounds) prep = std::async(std::launch::async, prepare, t);
    if (t >= 2) pars = std::async(std::launch::async, parse, t - 2);
    std::exception_ptr err;
    try {
      if (t >= 1 && t - 1 < rounds) communicate(t - 1);
    } catch (...) {
      err = std::current_exception();
    }
    for (auto* f : {&prep, &pars}) {
      if (!f->valid()) continue;
      try {
        f->get();
      } catch (...) {
        if (!err) err = std::current_exception();
      }
    }
    if (err) std::rethrow_exception(err);
  }
  return result;
}

}  // namespace hysortk
