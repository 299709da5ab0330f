#pragma once

// FASTA ingestion and read partitioning across ranks.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <istream>
#include <numeric>
#include <string>
#include <vector>

#include "hysortk/errors.hpp"
#include "hysortk/seq.hpp"
#include "hysortk/wire.hpp"

namespace hysortk {

inline constexpr std::size_t kMaxReadLength = kMaxSupermerLen;

namespace detail {

// Splits one FASTA record into ACGT-only fragments. Fragments longer than
// kMaxReadLength are cut into pieces that overlap by `overlap` bases.
inline void emit_fragments(const std::string& seq, std::size_t overlap, std::vector<Read>& out) {
  auto emit = [&](std::size_t begin, std::size_t end) {
    while (begin < end) {
      const std::size_t piece = std::min(kMaxReadLength, end - begin);
      out.push_back(Read{static_cast<std::uint32_t>(out.size()), seq.substr(begin, piece)});
      if (begin + piece == end) break;
      begin += piece - std::min(overlap, piece - 1);
    }
  };
  std::size_t start = 0;
  for (std::size_t i = 0; i <= seq.size(); ++i) {
    if (i == seq.size() || kBaseCode[static_cast<unsigned char>(seq[i])] == kInvalidBase) {
      if (i > start) emit(start, i);
      start = i + 1;
    }
  }
}

}  // namespace detail

/// Parses FASTA text. Sequence lines are joined, upper-cased and split at
/// every non-ACGT character; each fragment becomes a Read with the next dense
/// id. `overlap` (k - 1 in the pipeline) keeps k-mers intact across the
/// 65,535-base length cap.
inline void parse_fasta_stream(std::istream& in, const std::string& name, std::vector<Read>& out,
                               std::size_t overlap = 0) {
  std::string line;
  std::string seq;
  bool in_record = false;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '>') {
      if (in_record) detail::emit_fragments(seq, overlap, out);
      seq.clear();
      in_record = true;
      continue;
    }
    if (line[0] == ';') continue;
    if (!in_record) {
      throw IngestError(name + ":" + std::to_string(lineno) +
                        ": sequence data before the first '>' header");
    }
    for (char c : line) {
      seq.push_back(static_cast<char>(c >= 'a' && c <= 'z' ? c - 'a' + 'A' : c));
    }
  }
  if (in_record) detail::emit_fragments(seq, overlap, out);
}

inline std::vector<Read> parse_fasta(const std::vector<std::string>& paths,
                                     std::size_t overlap = 0) {
  std::vector<Read> reads;
  for (const auto& p : paths) {
    std::ifstream in(p);
    if (!in) throw IngestError(p + ": cannot open input file");
    parse_fasta_stream(in, p, reads, overlap);
  }
  return reads;
}

/// Longest-read-first onto the least-loaded rank (load = total bases, ties to
/// the lower rank id). Each rank's list is returned in read order.
inline std::vector<std::vector<std::size_t>> partition_reads(const std::vector<Read>& reads,
                                                             std::uint32_t ranks) {
  if (ranks == 0) throw ConfigError("rank count must be >= 1");
  std::vector<std::size_t> order(reads.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return reads[a].length() > reads[b].length();
  });
  std::vector<std::vector<std::size_t>> out(ranks);
  std::vector<std::uint64_t> load(ranks, 0);
  for (std::size_t i : order) {
    const auto r = static_cast<std::size_t>(std::min_element(load.begin(), load.end()) -
                                            load.begin());
    out[r].push_back(i);
    load[r] += reads[i].length();
  }
  for (auto& v : out) std::sort(v.begin(), v.end());
  return out;
}

}  // namespace hysortk
