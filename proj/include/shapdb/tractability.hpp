#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "shapdb/fd.hpp"
#include "shapdb/inconsistency.hpp"

namespace shapdb {

namespace detail {

using AttrSet = std::set<std::size_t>;

inline AttrSet closure(const AttrSet& start, const std::vector<FD>& fds, std::size_t skip = SIZE_MAX) {
  AttrSet c = start;
  bool grew = true;
  while (grew) {
    grew = false;
    for (std::size_t i = 0; i < fds.size(); ++i) {
      if (i == skip) continue;
      const auto& fd = fds[i];
      if (std::all_of(fd.lhs.begin(), fd.lhs.end(), [&](auto a) { return c.count(a) > 0; }))
        for (auto a : fd.rhs) grew |= c.insert(a).second;
    }
  }
  return c;
}

inline bool covers(const AttrSet& c, const std::vector<std::size_t>& attrs) {
  return std::all_of(attrs.begin(), attrs.end(), [&](auto a) { return c.count(a) > 0; });
}

// Equivalence-preserving normal form of the FDs of a single relation:
// trivial parts removed, left-reduced, equal left-hand sides merged,
// redundant FDs dropped.
inline std::vector<FD> normalize_relation(std::vector<FD> fds) {
  std::vector<FD> out;
  for (auto fd : fds) {
    std::vector<std::size_t> rhs;
    std::set_difference(fd.rhs.begin(), fd.rhs.end(), fd.lhs.begin(), fd.lhs.end(), std::back_inserter(rhs));
    if (rhs.empty()) continue;
    fd.rhs = std::move(rhs);
    out.push_back(std::move(fd));
  }

  for (std::size_t i = 0; i < out.size(); ++i) {
    for (std::size_t k = 0; k < out[i].lhs.size();) {
      AttrSet reduced(out[i].lhs.begin(), out[i].lhs.end());
      reduced.erase(out[i].lhs[k]);
      if (covers(closure(reduced, out), out[i].rhs)) out[i].lhs.erase(out[i].lhs.begin() + static_cast<long>(k));
      else ++k;
    }
  }

  std::map<std::vector<std::size_t>, std::set<std::size_t>> merged;
  std::vector<std::vector<std::size_t>> order;
  for (const auto& fd : out) {
    if (!merged.count(fd.lhs)) order.push_back(fd.lhs);
    merged[fd.lhs].insert(fd.rhs.begin(), fd.rhs.end());
  }
  std::vector<FD> result;
  for (const auto& lhs : order) {
    const auto& rhs = merged[lhs];
    std::vector<std::size_t> r;
    std::set_difference(rhs.begin(), rhs.end(), lhs.begin(), lhs.end(), std::back_inserter(r));
    if (!r.empty()) result.push_back(FD{out.empty() ? "" : out.front().relation, lhs, r});
  }

  for (std::size_t i = 0; i < result.size();) {
    AttrSet lhs(result[i].lhs.begin(), result[i].lhs.end());
    if (covers(closure(lhs, result, i), result[i].rhs)) result.erase(result.begin() + static_cast<long>(i));
    else ++i;
  }
  return result;
}

inline bool is_lhs_chain(const std::vector<FD>& fds) {
  std::vector<std::vector<std::size_t>> lhs;
  for (const auto& fd : fds) lhs.push_back(fd.lhs);
  std::sort(lhs.begin(), lhs.end(), [](const auto& a, const auto& b) { return a.size() < b.size(); });
  for (std::size_t i = 1; i < lhs.size(); ++i)
    if (!std::includes(lhs[i].begin(), lhs[i].end(), lhs[i - 1].begin(), lhs[i - 1].end())) return false;
  return true;
}

}  // namespace detail

struct LhsChainResult {
  bool chain_after_normalization = false;
  std::vector<FD> normalized;
};

// Normalizes Δ per relation and tests whether the left-hand sides form a
// containment chain. A positive answer is sound; a negative one only means
// no chain was found after normalization.
inline LhsChainResult lhs_chain_classify(const std::vector<FD>& fds) {
  std::map<std::string, std::vector<FD>> by_relation;
  for (const auto& fd : fds) by_relation[fd.relation].push_back(fd);
  LhsChainResult r{true, {}};
  for (auto& [rel, group] : by_relation) {
    auto norm = detail::normalize_relation(group);
    for (auto& fd : norm) fd.relation = rel;
    r.chain_after_normalization = r.chain_after_normalization && detail::is_lhs_chain(norm);
    r.normalized.insert(r.normalized.end(), norm.begin(), norm.end());
  }
  return r;
}

struct Citation {
  std::string key;
  std::string statement;
};

struct TractabilityReport {
  MeasureKind measure = MeasureKind::drastic;
  std::string lhs_chain;  // "yes" or "no after normalization"
  std::string column;     // column of the complexity table
  std::string exact;
  std::string approximation;
  std::vector<Citation> citations;
  std::vector<FD> normalized;

  std::string verdict() const { return exact + "; " + approximation; }
};

namespace detail {

// Two FDs with single, pairwise distinct attributes, i.e. {A->B, C->D} up to renaming.
inline bool two_disjoint_unary_fds(const std::vector<FD>& normalized) {
  std::map<std::string, std::vector<FD>> by_relation;
  for (const auto& fd : normalized) by_relation[fd.relation].push_back(fd);
  for (const auto& [rel, group] : by_relation) {
    if (group.size() != 2) continue;
    std::set<std::size_t> attrs;
    bool unary = true;
    for (const auto& fd : group) {
      unary = unary && fd.lhs.size() == 1 && fd.rhs.size() == 1;
      attrs.insert(fd.lhs.begin(), fd.lhs.end());
      attrs.insert(fd.rhs.begin(), fd.rhs.end());
    }
    if (unary && attrs.size() == 4) return true;
  }
  return false;
}

}  // namespace detail

inline TractabilityReport tractability_report(const std::vector<FD>& fds, MeasureKind kind) {
  const auto chain = lhs_chain_classify(fds);
  TractabilityReport r;
  r.measure = kind;
  r.normalized = chain.normalized;
  r.lhs_chain = chain.chain_after_normalization ? "yes" : "no after normalization";
  r.column = chain.chain_after_normalization ? "lhs chain" : "no lhs chain";

  const Citation drastic_dichotomy{
      "drastic-dichotomy", "FD sets equivalent to one with an lhs chain give FP; all others are FP^#P-complete"};
  const Citation drastic_fpras{"drastic-fpras",
                               "additive and multiplicative FPRAS for every FD set (nonzero values >= 1/(|D|(|D|-1)))"};
  const Citation mc_dichotomy{"mc-dichotomy",
                              "FD sets equivalent to one with an lhs chain give FP; all others are FP^#P-complete"};

  switch (kind) {
    case MeasureKind::MI:
      r.exact = "PTime";
      r.approximation = "FPRAS available";
      r.citations.push_back({"mi-ptime", "FP for every FD set: a fact's marginal is its number of conflicts in the prefix"});
      break;
    case MeasureKind::P:
      r.exact = "PTime";
      r.approximation = "FPRAS available";
      r.citations.push_back({"p-ptime", "FP for every FD set: marginals count newly problematic facts"});
      break;
    case MeasureKind::drastic:
      r.exact = chain.chain_after_normalization ? "PTime" : "FP^#P-complete";
      r.approximation = "FPRAS available";
      r.citations = {drastic_dichotomy, drastic_fpras};
      break;
    case MeasureKind::R:
      if (chain.chain_after_normalization) {
        r.exact = "PTime";
        r.approximation = "FPRAS available";
        r.citations.push_back({"r-chain", "FP for FD sets equivalent to one with an lhs chain"});
      } else {
        r.exact = "unknown";
        r.approximation = "unknown";
        r.citations.push_back({"r-hardness", "NP-hard with neither additive nor multiplicative FPRAS when Simplify "
                                             "leaves a nonempty FD set; Simplify is not implemented here"});
        r.citations.push_back({"r-open", "open: complexity when there is no lhs chain but Simplify empties the FD "
                                         "set, e.g. {A->B, B->A} over R(A,B)"});
      }
      break;
    case MeasureKind::MC:
      if (chain.chain_after_normalization) {
        r.exact = "PTime";
        r.approximation = "FPRAS available";
        r.citations.push_back(mc_dichotomy);
      } else {
        r.exact = "FP^#P-complete";
        r.citations.push_back(mc_dichotomy);
        if (detail::two_disjoint_unary_fds(chain.normalized)) {
          r.approximation = "no FPRAS (unless NP = RP)";
          r.citations.push_back({"mc-no-fpras", "counting maximal consistent subsets for {A->B, C->D} over "
                                                "R(A,B,C,D) has no FPRAS unless NP = RP"});
        } else {
          r.approximation = "FPRAS unknown";
          r.citations.push_back({"mc-open", "open: whether a multiplicative FPRAS exists for FD sets without an lhs "
                                            "chain (it would yield one for counting maximal matchings)"});
        }
      }
      break;
  }
  return r;
}

}  // namespace shapdb
