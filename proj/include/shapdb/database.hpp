#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "shapdb/error.hpp"

namespace shapdb {

using Value = std::string;
using FactId = std::int64_t;

enum class Provenance { endogenous, exogenous };

struct Fact {
  FactId id = 0;
  std::string relation;
  std::vector<Value> values;
  Provenance provenance = Provenance::endogenous;

  bool endogenous() const noexcept { return provenance == Provenance::endogenous; }
};

// Positional attribute names: A, B, ..., Z for the first 26 columns, then "27", "28", ...
inline std::string default_attribute_name(std::size_t position) {
  if (position < 26) return std::string(1, static_cast<char>('A' + position));
  return std::to_string(position + 1);
}

struct RelationSchema {
  std::size_t arity = 0;
  std::vector<std::string> attributes;

  // Accepts an attribute name or a 1-based column number.
  std::optional<std::size_t> attribute_index(std::string_view name) const {
    for (std::size_t i = 0; i < attributes.size(); ++i)
      if (attributes[i] == name) return i;
    if (!name.empty() && std::all_of(name.begin(), name.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      std::size_t pos = std::stoul(std::string(name));
      if (pos >= 1 && pos <= arity) return pos - 1;
    }
    return std::nullopt;
  }
};

// Relation name -> arity and attribute names. Inferred from the first
// occurrence of each relation.
class Schema {
 public:
  const RelationSchema* find(const std::string& relation) const {
    auto it = relations_.find(relation);
    return it == relations_.end() ? nullptr : &it->second;
  }

  // Registers `relation` with `arity`, or checks agreement with an earlier registration.
  // Returns false on an arity conflict.
  bool declare(const std::string& relation, std::size_t arity) {
    auto [it, inserted] = relations_.try_emplace(relation);
    if (inserted) {
      it->second.arity = arity;
      for (std::size_t i = 0; i < arity; ++i) it->second.attributes.push_back(default_attribute_name(i));
      return true;
    }
    return it->second.arity == arity;
  }

  const std::map<std::string, RelationSchema>& relations() const noexcept { return relations_; }

 private:
  std::map<std::string, RelationSchema> relations_;
};

// A finite set of facts, partitioned into endogenous and exogenous facts.
// Facts are kept in insertion order; a fact's position is its "index".
class Database {
 public:
  // Appends a fact. An id of 0 requests the next free id (max id + 1).
  FactId add(std::string relation, std::vector<Value> values, Provenance provenance, FactId id = 0) {
    if (!schema_.declare(relation, values.size()))
      throw PreconditionError("arity mismatch for relation " + relation + ": expected " +
                              std::to_string(schema_.find(relation)->arity) + ", got " +
                              std::to_string(values.size()));
    if (id == 0) id = next_id_;
    if (by_id_.count(id)) throw PreconditionError("duplicate fact id " + std::to_string(id));
    auto key = std::make_pair(relation, values);
    if (by_content_.count(key)) throw PreconditionError("duplicate fact " + describe(relation, values));
    by_content_.emplace(std::move(key), facts_.size());
    by_id_.emplace(id, facts_.size());
    next_id_ = std::max(next_id_, id + 1);
    facts_.push_back(Fact{id, std::move(relation), std::move(values), provenance});
    return id;
  }

  const std::vector<Fact>& facts() const noexcept { return facts_; }
  std::size_t size() const noexcept { return facts_.size(); }
  bool empty() const noexcept { return facts_.empty(); }
  const Schema& schema() const noexcept { return schema_; }

  const Fact& fact(FactId id) const { return facts_[index_of(id)]; }

  std::size_t index_of(FactId id) const {
    auto it = by_id_.find(id);
    if (it == by_id_.end()) throw PreconditionError("unknown fact id " + std::to_string(id));
    return it->second;
  }

  bool contains(FactId id) const { return by_id_.count(id) > 0; }

  std::optional<std::size_t> find(const std::string& relation, const std::vector<Value>& values) const {
    auto it = by_content_.find(std::make_pair(relation, values));
    if (it == by_content_.end()) return std::nullopt;
    return it->second;
  }

  // Indices of endogenous (resp. exogenous) facts, in insertion order.
  std::vector<std::size_t> endogenous_indices() const { return indices_with(Provenance::endogenous); }
  std::vector<std::size_t> exogenous_indices() const { return indices_with(Provenance::exogenous); }

  static std::string describe(const std::string& relation, const std::vector<Value>& values) {
    std::string s = relation + "(";
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i) s += ",";
      s += values[i];
    }
    return s + ")";
  }
  static std::string describe(const Fact& f) { return describe(f.relation, f.values); }

 private:
  std::vector<std::size_t> indices_with(Provenance p) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < facts_.size(); ++i)
      if (facts_[i].provenance == p) out.push_back(i);
    return out;
  }

  Schema schema_;
  std::vector<Fact> facts_;
  std::unordered_map<FactId, std::size_t> by_id_;
  std::map<std::pair<std::string, std::vector<Value>>, std::size_t> by_content_;
  FactId next_id_ = 1;
};

}  // namespace shapdb
