// Command-line driver: count k-mers of FASTA files over simulated ranks.

#include <chrono>
#include <cmath>
#include <iostream>
#include <limits>
#include <map>
#include <string>

#include "CLI11.hpp"

#include "hysortk/hysortk.hpp"
#include "hysortk/output.hpp"

namespace {

template <std::size_t W>
void run(hysortk::RunConfig& cfg, hysortk::OutputFiles& files) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto reads = hysortk::parse_fasta(cfg.inputs, cfg.k - 1);
  const double io_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  auto result = hysortk::run_pipeline<W>(cfg, reads);
  result.report.times.io_s = io_s;
  hysortk::emit_outputs(result, cfg, files);
  std::cerr << "hysortk: " << result.report.kmer_instances << " k-mer instances, "
            << result.report.distinct_kmers << " distinct, " << result.report.filtered_kmers
            << " in [" << cfg.lower << ", " << cfg.upper << "]\n";
}

}  // namespace

int main(int argc, char** argv) {
  hysortk::RunConfig cfg;
  std::string heavy = "4";
  std::string sorter = "auto";
  std::string budget = "unlimited";
  bool no_overlap = false;

  CLI::App app{"Sorting-based k-mer counter over simulated ranks"};
  app.add_option("inputs", cfg.inputs, "FASTA input files")->required();
  app.add_option("--k", cfg.k, "k-mer length (2..63)")->capture_default_str();
  app.add_option("--m", cfg.m, "minimizer length; 0 = k/2 for k < 46, else 23")
      ->capture_default_str();
  app.add_option("--ranks", cfg.ranks, "simulated ranks")->capture_default_str();
  app.add_option("--workers-per-rank", cfg.workers_per_rank)->capture_default_str();
  app.add_option("--threads-per-worker", cfg.threads_per_worker)->capture_default_str();
  app.add_option("--tasks-per-worker", cfg.tasks_per_worker)->capture_default_str();
  app.add_option("--batch-size", cfg.batch_size, "bytes per rank pair per round")
      ->capture_default_str();
  app.add_option("--lower", cfg.lower, "lowest count kept in the dump")->capture_default_str();
  app.add_option("--upper", cfg.upper, "highest count kept in the dump")->capture_default_str();
  app.add_option("--seed", cfg.seed, "m-mer hash seed")->capture_default_str();
  app.add_flag("--canonical", cfg.canonical, "count canonical k-mers");
  app.add_flag("--extensions", cfg.extensions, "carry (read_id, pos) for every k-mer");
  app.add_option("--heavy-factor", heavy, "heavy task threshold as a multiple of the mean, or inf")
      ->capture_default_str();
  app.add_option("--sorter", sorter, "sort backend")
      ->check(CLI::IsMember({"auto", "inplace", "outofplace"}))
      ->capture_default_str();
  app.add_option("--memory-budget", budget, "bytes available to one sort, or unlimited")
      ->capture_default_str();
  app.add_option("--out-histogram", cfg.out_histogram, "histogram TSV path");
  app.add_option("--out-dump", cfg.out_dump, "filtered k-mer TSV path");
  app.add_option("--out-report", cfg.out_report, "JSON run report path");
  app.add_flag("--no-overlap", no_overlap, "run exchange stages sequentially");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(hysortk::ErrorKind::config);
  }

  try {
    try {
      cfg.heavy_factor = heavy == "inf" ? std::numeric_limits<double>::infinity()
                                        : std::stod(heavy);
      cfg.memory_budget = budget == "unlimited" ? hysortk::kUnlimitedMemory
                                                : std::stoull(budget);
    } catch (const std::logic_error&) {
      throw hysortk::ConfigError("invalid --heavy-factor or --memory-budget value");
    }
    cfg.sorter = sorter == "inplace"      ? hysortk::SorterChoice::inplace
                 : sorter == "outofplace" ? hysortk::SorterChoice::outofplace
                                          : hysortk::SorterChoice::automatic;
    cfg.overlap = !no_overlap;
    cfg.validate();

    hysortk::OutputFiles files(cfg);
    if (cfg.words() == 1) {
      run<1>(cfg, files);
    } else {
      run<2>(cfg, files);
    }
  } catch (const hysortk::Error& e) {
    std::cerr << "hysortk: error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::bad_alloc&) {
    std::cerr << "hysortk: error: out of memory\n";
    return static_cast<int>(hysortk::ErrorKind::internal);
  }
  return 0;
}
