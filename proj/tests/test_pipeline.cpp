#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "hysortk/hysortk.hpp"
#include "hysortk/output.hpp"
#include "oracle.hpp"

using namespace hysortk;
namespace fs = std::filesystem;

namespace {

std::vector<Read> to_reads(const std::vector<std::string>& seqs) {
  std::vector<Read> out;
  for (const auto& s : seqs) out.push_back(Read{static_cast<std::uint32_t>(out.size()), s});
  return out;
}

template <std::size_t W>
void expect_matches_oracle(const RunResult<W>& res, const std::vector<std::string>& seqs,
                           const RunConfig& cfg) {
  oracle::CountMap want;
  oracle::brute_force_count(seqs, cfg.k, cfg.canonical, want);
  std::map<std::uint64_t, std::uint64_t> freq;
  for (const auto& [kmer, c] : want) ++freq[c];
  EXPECT_EQ(res.histogram.frequency, freq);
  std::size_t in_range = 0;
  for (const auto& [kmer, c] : want) in_range += c >= cfg.lower && c <= cfg.upper;
  ASSERT_EQ(res.histogram.filtered.size(), in_range);
  for (const auto& f : res.histogram.filtered) {
    ASSERT_EQ(f.count, want.at(kmer_value(f.kmer, cfg.k)));
  }
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("hysortk_test_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(HYSORTK_CLI) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST(Pipeline, TinyExample) {
  RunConfig cfg;
  cfg.k = 4;
  cfg.lower = 1;
  cfg.upper = 50;
  cfg.ranks = 2;
  const auto res = run_pipeline<1>(cfg, to_reads({"AAAAC"}));
  ASSERT_EQ(res.histogram.filtered.size(), 2u);
  EXPECT_EQ(unpack_kmer(res.histogram.filtered[0].kmer, 4), "AAAA");
  EXPECT_EQ(res.histogram.filtered[0].count, 1u);
  EXPECT_EQ(unpack_kmer(res.histogram.filtered[1].kmer, 4), "AAAC");
  EXPECT_EQ(res.histogram.frequency, (std::map<std::uint64_t, std::uint64_t>{{1, 2}}));
}

TEST(Pipeline, EmptyAndShortInput) {
  RunConfig cfg;
  cfg.k = 21;
  auto res = run_pipeline<1>(cfg, {});
  EXPECT_TRUE(res.histogram.frequency.empty());
  res = run_pipeline<1>(cfg, to_reads({"ACGT"}));
  EXPECT_TRUE(res.histogram.frequency.empty());
  EXPECT_EQ(res.report.reads_skipped, 1u);
}

TEST(Pipeline, MatchesBruteForce) {
  std::mt19937_64 rng(1);
  for (unsigned k : {17u, 31u, 45u, 55u}) {
    for (bool canon : {false, true}) {
      const auto seqs = oracle::repeat_seeded_reads(rng, 60, 50, 700, 0.2);
      RunConfig cfg;
      cfg.k = k;
      cfg.canonical = canon;
      cfg.ranks = 3;
      cfg.threads_per_worker = 2;
      cfg.batch_size = 4000;
      cfg.lower = 1;
      cfg.upper = 5;
      if (k <= 32) {
        expect_matches_oracle(run_pipeline<1>(cfg, to_reads(seqs)), seqs, cfg);
      } else {
        expect_matches_oracle(run_pipeline<2>(cfg, to_reads(seqs)), seqs, cfg);
      }
    }
  }
}

TEST(Pipeline, ConfigurationDoesNotChangeCounts) {
  std::mt19937_64 rng(2);
  const auto seqs = oracle::repeat_seeded_reads(rng, 80, 100, 900, 0.3);
  const auto reads = to_reads(seqs);
  for (bool ext : {false, true}) {
    RunConfig base;
    base.k = 31;
    base.lower = 1;
    base.extensions = ext;
    const auto ref = run_pipeline<1>(base, reads);
    for (std::uint32_t R : {1u, 2u, 5u}) {
      for (double heavy : {1.5, std::numeric_limits<double>::infinity()}) {
        for (auto sorter : {SorterChoice::inplace, SorterChoice::outofplace}) {
          RunConfig cfg = base;
          cfg.ranks = R;
          cfg.heavy_factor = heavy;
          cfg.sorter = sorter;
          cfg.batch_size = 3000;
          cfg.overlap = R != 2;
          const auto res = run_pipeline<1>(cfg, reads);
          EXPECT_EQ(res.histogram.frequency, ref.histogram.frequency);
          EXPECT_EQ(res.histogram.filtered, ref.histogram.filtered);
        }
      }
    }
  }
}

TEST(Pipeline, ExtensionsPointAtTheKmer) {
  std::mt19937_64 rng(3);
  const auto seqs = oracle::random_reads(rng, 30, 40, 300);
  RunConfig cfg;
  cfg.k = 25;
  cfg.lower = 1;
  cfg.extensions = true;
  cfg.heavy_factor = std::numeric_limits<double>::infinity();
  const auto res = run_pipeline<1>(cfg, to_reads(seqs));
  for (const auto& f : res.histogram.filtered) {
    ASSERT_EQ(f.extensions.size(), f.count);
    for (const auto& e : f.extensions) {
      ASSERT_EQ(seqs[e.read_id].substr(e.pos_in_read, 25), unpack_kmer(f.kmer, 25));
    }
  }
}

TEST(Pipeline, Deterministic) {
  std::mt19937_64 rng(4);
  const auto reads = to_reads(oracle::random_reads(rng, 40, 100, 500));
  RunConfig cfg;
  cfg.lower = 1;
  const auto a = run_pipeline<1>(cfg, reads);
  const auto b = run_pipeline<1>(cfg, reads);
  EXPECT_EQ(a.histogram.frequency, b.histogram.frequency);
  EXPECT_EQ(a.histogram.filtered, b.histogram.filtered);
  EXPECT_EQ(a.report.supermer_exchange.payload_bytes, b.report.supermer_exchange.payload_bytes);
}

TEST(Pipeline, ReportAccounting) {
  std::mt19937_64 rng(5);
  const auto reads = to_reads(oracle::random_reads(rng, 50, 100, 500));
  RunConfig cfg;
  cfg.ranks = 3;
  cfg.batch_size = 5000;
  const auto res = run_pipeline<1>(cfg, reads);
  const auto& rep = res.report;
  EXPECT_EQ(rep.kmer_instances, res.histogram.instances());
  EXPECT_EQ(rep.tasks.size(), cfg.num_tasks());
  const auto& x = rep.supermer_exchange;
  EXPECT_EQ(x.total_bytes(), x.rounds * 9 * cfg.batch_size);
  std::uint64_t task_bytes = 0;
  for (const auto& t : rep.tasks) task_bytes += t.size_bytes;
  EXPECT_EQ(task_bytes, rep.supermer_payload_bytes);
}

TEST(Outputs, TsvAndDump) {
  RunConfig cfg;
  cfg.k = 4;
  cfg.lower = 2;
  cfg.extensions = true;
  cfg.ranks = 2;
  const auto res = run_pipeline<1>(cfg, to_reads({"AAAAAC", "CAAAA"}));
  std::ostringstream hist, dump;
  write_histogram_tsv(hist, res.histogram);
  write_dump_tsv(dump, res.histogram, 4, true);
  EXPECT_EQ(hist.str(), "1\t2\n3\t1\n");
  EXPECT_EQ(dump.str(), "kmer\tcount\nAAAA\t3\n0\t0\n0\t1\n1\t1\n");
}

TEST(Outputs, EmptyDumpHasHeader) {
  Histogram<1> h;
  std::ostringstream dump;
  write_dump_tsv(dump, h, 31, false);
  EXPECT_EQ(dump.str(), "kmer\tcount\n");
}

TEST(Cli, EndToEndAndExitCodes) {
  TempDir dir;
  const auto fa = dir.path / "in.fa";
  {
    std::ofstream out(fa);
    out << ">r\nAAAAAC\n>s\nCAAAA\n";
  }
  const auto hist = dir.path / "h.tsv", dump = dir.path / "d.tsv", rep = dir.path / "r.json";
  ASSERT_EQ(run_cli(fa.string() + " --k 4 --ranks 2 --out-histogram " + hist.string() +
                    " --out-dump " + dump.string() + " --out-report " + rep.string()),
            0);
  EXPECT_EQ(slurp(hist), "1\t2\n3\t1\n");
  EXPECT_EQ(slurp(dump), "kmer\tcount\nAAAA\t3\n");
  const auto report = nlohmann::json::parse(slurp(rep));
  EXPECT_EQ(report["format"], "hysortk-report-1");
  EXPECT_EQ(report["config"]["k"], 4);

  EXPECT_EQ(run_cli(fa.string() + " --k 70"), 2);
  EXPECT_EQ(run_cli(fa.string() + " --k 4 --m 4"), 2);
  EXPECT_EQ(run_cli(fa.string() + " --bogus"), 2);
  EXPECT_EQ(run_cli((dir.path / "missing.fa").string()), 3);
  {
    std::ofstream out(dir.path / "bad.fa");
    out << "ACGT\n";
  }
  EXPECT_EQ(run_cli((dir.path / "bad.fa").string()), 3);
  const auto unwritable = dir.path / "no" / "such" / "dir" / "h.tsv";
  EXPECT_EQ(run_cli(fa.string() + " --k 4 --out-histogram " + unwritable.string()), 4);
  EXPECT_EQ(run_cli(fa.string() + " --k 4 --batch-size 5"), 2);
}
