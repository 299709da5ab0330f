#include <gtest/gtest.h>

#include <sstream>

#include "hysortk/fasta.hpp"

using namespace hysortk;

namespace {

std::vector<Read> parse(const std::string& text, std::size_t overlap = 0) {
  std::istringstream in(text);
  std::vector<Read> out;
  parse_fasta_stream(in, "test.fa", out, overlap);
  return out;
}

}  // namespace

TEST(Fasta, SingleRecord) {
  const auto r = parse(">r1\nACGT\n");
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].id, 0u);
  EXPECT_EQ(r[0].bases, "ACGT");
}

TEST(Fasta, WrappedLinesAndLowercase) {
  const auto r = parse(">a desc\nACG\ntac\n\n>b\r\nGG\r\n");
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[0].bases, "ACGTAC");
  EXPECT_EQ(r[1].bases, "GG");
  EXPECT_EQ(r[1].id, 1u);
}

TEST(Fasta, SplitsAtNonAcgt) {
  const auto r = parse(">r\nACNNGT\n");
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[0].bases, "AC");
  EXPECT_EQ(r[1].bases, "GT");
  EXPECT_EQ(r[0].id, 0u);
  EXPECT_EQ(r[1].id, 1u);
  EXPECT_TRUE(parse(">r\nNNNN\n").empty());
  EXPECT_TRUE(parse(">r\n").empty());
  EXPECT_TRUE(parse("").empty());
}

TEST(Fasta, CommentLinesIgnored) {
  const auto r = parse(";comment\n>r\nAC\n;x\nGT\n");
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].bases, "ACGT");
}

TEST(Fasta, SequenceBeforeHeaderReportsLine) {
  try {
    parse("\nACGT\n>r\nAC\n");
    FAIL() << "expected IngestError";
  } catch (const IngestError& e) {
    EXPECT_NE(std::string(e.what()).find("test.fa:2"), std::string::npos) << e.what();
    EXPECT_EQ(e.exit_code(), 3);
  }
}

TEST(Fasta, MissingFile) {
  EXPECT_THROW(parse_fasta({"/nonexistent/input.fa"}), IngestError);
}

TEST(Fasta, LongReadsSplitWithOverlap) {
  const std::size_t n = kMaxReadLength * 2 + 10;
  std::string seq(n, 'A');
  for (std::size_t i = 0; i < n; ++i) seq[i] = "ACGT"[(i * 7 + i / 3) % 4];
  const auto r = parse(">long\n" + seq + "\n", 30);
  ASSERT_EQ(r.size(), 3u);
  std::size_t start = 0;
  for (const auto& piece : r) {
    EXPECT_LE(piece.length(), kMaxReadLength);
    EXPECT_EQ(piece.bases, seq.substr(start, piece.length()));
    start += piece.length() - 30;
  }
  EXPECT_EQ(start + 30, n);
}

TEST(PartitionReads, LongestFirstExample) {
  std::vector<Read> reads;
  for (std::size_t len : {8u, 7u, 5u, 4u}) {
    reads.push_back(Read{static_cast<std::uint32_t>(reads.size()), std::string(len, 'A')});
  }
  const auto p = partition_reads(reads, 2);
  EXPECT_EQ(p[0], (std::vector<std::size_t>{0, 3}));
  EXPECT_EQ(p[1], (std::vector<std::size_t>{1, 2}));
}

TEST(PartitionReads, NoWorseThanRoundRobin) {
  std::vector<Read> reads;
  for (std::size_t len : {100u, 1u, 100u, 1u, 100u, 1u, 100u, 1u}) {
    reads.push_back(Read{static_cast<std::uint32_t>(reads.size()), std::string(len, 'C')});
  }
  const auto p = partition_reads(reads, 2);
  std::vector<std::size_t> load(2, 0);
  for (std::size_t r = 0; r < 2; ++r) {
    for (auto i : p[r]) load[r] += reads[i].length();
  }
  EXPECT_EQ(load[0], 202u);
  EXPECT_EQ(load[1], 202u);
  // round-robin would put all 100-base reads on rank 0: 400 vs 4
}
