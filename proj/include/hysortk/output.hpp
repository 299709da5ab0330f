#pragma once

// Output files: histogram TSV, filtered k-mer dump TSV, JSON run report.
//
// histogram   one "count\tnum_distinct" line per frequency, ascending
// dump        header "kmer\tcount", then "KMER\tcount" per filtered k-mer in
//             k-mer order; with extensions each k-mer line is followed by one
//             "read_id\tpos" line per instance
// report      a single JSON object; key names are stable

#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "hysortk/config.hpp"
#include "hysortk/errors.hpp"
#include "hysortk/pipeline.hpp"
#include "hysortk/sortcount.hpp"

namespace hysortk {

inline constexpr const char* kDumpHeader = "kmer\tcount";

template <std::size_t W>
void write_histogram_tsv(std::ostream& out, const Histogram<W>& h) {
  for (const auto& [count, distinct] : h.frequency) out << count << '\t' << distinct << '\n';
}

template <std::size_t W>
void write_dump_tsv(std::ostream& out, const Histogram<W>& h, unsigned k, bool extensions) {
  out << kDumpHeader << '\n';
  for (const auto& f : h.filtered) {
    out << unpack_kmer(f.kmer, k) << '\t' << f.count << '\n';
    if (extensions) {
      for (const auto& e : f.extensions) out << e.read_id << '\t' << e.pos_in_read << '\n';
    }
  }
}

inline nlohmann::ordered_json exchange_json(const ExchangeStats& x) {
  nlohmann::ordered_json j;
  j["rounds"] = x.rounds;
  j["records"] = x.records;
  j["payload_bytes"] = x.payload_bytes;
  j["padding_bytes"] = x.padding_bytes;
  j["total_bytes"] = x.total_bytes();
  j["per_destination_bytes"] = x.per_destination_bytes;
  return j;
}

inline nlohmann::ordered_json report_json(const RunReport& rep, const RunConfig& cfg) {
  nlohmann::ordered_json j;
  j["format"] = "hysortk-report-1";
  auto& c = j["config"];
  c["k"] = cfg.k;
  c["m"] = cfg.effective_m();
  c["ranks"] = cfg.ranks;
  c["workers_per_rank"] = cfg.workers_per_rank;
  c["threads_per_worker"] = cfg.threads_per_worker;
  c["tasks_per_worker"] = cfg.tasks_per_worker;
  c["tasks"] = cfg.num_tasks();
  c["batch_size"] = cfg.batch_size;
  c["lower"] = cfg.lower;
  c["upper"] = cfg.upper;
  c["seed"] = cfg.seed;
  c["canonical"] = cfg.canonical;
  c["extensions"] = cfg.extensions;
  c["heavy_factor"] = std::isinf(cfg.heavy_factor) ? nlohmann::ordered_json("inf")
                                                   : nlohmann::ordered_json(cfg.heavy_factor);
  c["sorter"] = to_string(cfg.sorter);
  c["memory_budget"] = cfg.memory_budget;
  c["overlap"] = cfg.overlap;

  auto& t = j["times"];
  t["io_s"] = rep.times.io_s;
  t["prepare_s"] = rep.times.prepare_s;
  t["exchange_s"] = rep.times.exchange_s;
  t["count_s"] = rep.times.count_s;

  auto& in = j["input"];
  in["reads"] = rep.reads;
  in["reads_skipped"] = rep.reads_skipped;
  in["bases"] = rep.bases;
  in["kmer_instances"] = rep.kmer_instances;
  in["rank_bases"] = rep.rank_bases;

  auto& sm = j["supermers"];
  sm["count"] = rep.supermers;
  sm["splits"] = rep.supermer_splits;
  sm["payload_bytes"] = rep.supermer_payload_bytes;

  j["exchange"]["supermer"] = exchange_json(rep.supermer_exchange);
  j["exchange"]["kmerlist"] = exchange_json(rep.kmerlist_exchange);

  auto& a = j["assignment"];
  a["threshold"] = rep.assign_threshold;
  a["attempts"] = rep.assign_attempts;
  a["rank_loads"] = rep.rank_loads;

  auto tasks = nlohmann::ordered_json::array();
  for (const auto& d : rep.tasks) {
    nlohmann::ordered_json e;
    e["task_id"] = d.task_id;
    e["size_bytes"] = d.size_bytes;
    e["owner_rank"] = d.owner_rank;
    e["heavy"] = d.heavy;
    const auto& sb = rep.supermer_exchange.per_task_bytes;
    const auto& kb = rep.kmerlist_exchange.per_task_bytes;
    e["exchanged_bytes"] = (d.task_id < sb.size() ? sb[d.task_id] : 0) +
                           (d.task_id < kb.size() ? kb[d.task_id] : 0);
    tasks.push_back(std::move(e));
  }
  j["tasks"] = std::move(tasks);

  auto& h = j["histogram"];
  h["distinct_kmers"] = rep.distinct_kmers;
  h["filtered_kmers"] = rep.filtered_kmers;
  h["inplace_sorts"] = rep.inplace_sorts;
  h["outofplace_sorts"] = rep.outofplace_sorts;
  return j;
}

/// Output files are opened (and so checked for writability) before the run;
/// on failure every file this object created is removed.
class OutputFiles {
 public:
  explicit OutputFiles(const RunConfig& cfg) {
    open(cfg.out_histogram, histogram_);
    open(cfg.out_dump, dump_);
    open(cfg.out_report, report_);
  }

  OutputFiles(const OutputFiles&) = delete;
  OutputFiles& operator=(const OutputFiles&) = delete;

  ~OutputFiles() {
    if (!committed_) discard();
  }

  std::ofstream* histogram() { return histogram_.is_open() ? &histogram_ : nullptr; }
  std::ofstream* dump() { return dump_.is_open() ? &dump_ : nullptr; }
  std::ofstream* report() { return report_.is_open() ? &report_ : nullptr; }

  void commit() {
    for (auto* f : {&histogram_, &dump_, &report_}) {
      if (!f->is_open()) continue;
      f->flush();
      if (!*f) throw IoError("failed writing output file");
      f->close();
    }
    committed_ = true;
  }

  void discard() {
    for (auto* f : {&histogram_, &dump_, &report_}) {
      if (f->is_open()) f->close();
    }
    std::error_code ec;
    for (const auto& p : created_) std::filesystem::remove(p, ec);
    created_.clear();
  }

 private:
  void open(const std::string& path, std::ofstream& f) {
    if (path.empty()) return;
    f.open(path, std::ios::out | std::ios::trunc);
    if (!f) {
      discard();
      throw IoError(path + ": cannot open for writing");
    }
    created_.push_back(path);
  }

  std::ofstream histogram_;
  std::ofstream dump_;
  std::ofstream report_;
  std::vector<std::string> created_;
  bool committed_ = false;
};

template <std::size_t W>
void emit_outputs(const RunResult<W>& result, const RunConfig& cfg, OutputFiles& files) {
  if (auto* f = files.histogram()) write_histogram_tsv(*f, result.histogram);
  if (auto* f = files.dump()) write_dump_tsv(*f, result.histogram, cfg.k, cfg.extensions);
  if (auto* f = files.report()) *f << report_json(result.report, cfg).dump(2) << '\n';
  files.commit();
}

}  // namespace hysortk
