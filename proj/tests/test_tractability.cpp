#include <gtest/gtest.h>

#include <random>

#include "shapdb/shapdb.hpp"

using namespace shapdb;

namespace {

std::string verdict(const char* fds, MeasureKind k) { return tractability_report(parse_fds(fds), k).verdict(); }

const char* kChain = "R: A -> B\nR: A C -> D";
const char* kTwoWay = "R: A -> B\nR: B -> A";
const char* kIncomparable = "R: A -> B\nR: C -> D";

}  // namespace

TEST(LhsChain, Fixtures) {
  EXPECT_TRUE(lhs_chain_classify(parse_fds(kChain)).chain_after_normalization);
  EXPECT_FALSE(lhs_chain_classify(parse_fds(kTwoWay)).chain_after_normalization);
  EXPECT_FALSE(lhs_chain_classify(parse_fds(kIncomparable)).chain_after_normalization);
}

TEST(LhsChain, NormalizationFindsEquivalentChains) {
  // AB -> C is left-reducible to A -> C once A -> B holds
  EXPECT_TRUE(lhs_chain_classify(parse_fds("R: A -> B\nR: A B -> C\nR: B C -> B")).chain_after_normalization);
  // the second FD is implied by the first two
  EXPECT_TRUE(lhs_chain_classify(parse_fds("R: A -> B\nR: A -> C\nR: A -> B C")).chain_after_normalization);
  // separate relations are judged separately
  EXPECT_TRUE(lhs_chain_classify(parse_fds("R: A -> B\nS: B -> A")).chain_after_normalization);
  EXPECT_TRUE(lhs_chain_classify({}).chain_after_normalization);
  // empty lhs is contained in every lhs
  EXPECT_TRUE(lhs_chain_classify(parse_fds("R: -> A\nR: B -> C")).chain_after_normalization);
}

TEST(LhsChain, NormalizationPreservesClosures) {
  std::mt19937_64 rng(41);
  for (int round = 0; round < 300; ++round) {
    std::vector<FD> fds;
    const int count = static_cast<int>(rng() % 4) + 1;
    for (int i = 0; i < count; ++i) {
      FD fd{"R", {}, {}};
      for (std::size_t a = 0; a < 4; ++a) {
        if (rng() % 3 == 0) fd.lhs.push_back(a);
        else if (rng() % 3 == 0) fd.rhs.push_back(a);
      }
      if (fd.rhs.empty()) fd.rhs.push_back(rng() % 4);
      fds.push_back(fd);
    }
    const auto norm = lhs_chain_classify(fds).normalized;
    for (std::uint32_t s = 0; s < 16; ++s) {
      detail::AttrSet start;
      for (std::size_t a = 0; a < 4; ++a)
        if (s >> a & 1) start.insert(a);
      ASSERT_EQ(detail::closure(start, fds), detail::closure(start, norm));
    }
  }
}

// Every cell of the complexity table for the three fixture FD sets.
TEST(Tractability, ComplexityTableCells) {
  for (const char* fds : {kChain, kTwoWay, kIncomparable}) {
    EXPECT_EQ(verdict(fds, MeasureKind::MI), "PTime; FPRAS available");
    EXPECT_EQ(verdict(fds, MeasureKind::P), "PTime; FPRAS available");
  }
  EXPECT_EQ(verdict(kChain, MeasureKind::drastic), "PTime; FPRAS available");
  EXPECT_EQ(verdict(kChain, MeasureKind::R), "PTime; FPRAS available");
  EXPECT_EQ(verdict(kChain, MeasureKind::MC), "PTime; FPRAS available");

  EXPECT_EQ(verdict(kTwoWay, MeasureKind::drastic), "FP^#P-complete; FPRAS available");
  EXPECT_EQ(verdict(kTwoWay, MeasureKind::R), "unknown; unknown");
  EXPECT_EQ(verdict(kTwoWay, MeasureKind::MC), "FP^#P-complete; FPRAS unknown");

  EXPECT_EQ(verdict(kIncomparable, MeasureKind::drastic), "FP^#P-complete; FPRAS available");
  EXPECT_EQ(verdict(kIncomparable, MeasureKind::R), "unknown; unknown");
  EXPECT_EQ(verdict(kIncomparable, MeasureKind::MC), "FP^#P-complete; no FPRAS (unless NP = RP)");
}

TEST(Tractability, ReportFields) {
  const auto r = tractability_report(parse_fds(kTwoWay), MeasureKind::R);
  EXPECT_EQ(r.lhs_chain, "no after normalization");
  EXPECT_FALSE(r.citations.empty());
  EXPECT_EQ(r.normalized.size(), 2u);
  const auto c = tractability_report(parse_fds(kChain), MeasureKind::MC);
  EXPECT_EQ(c.lhs_chain, "yes");
}
