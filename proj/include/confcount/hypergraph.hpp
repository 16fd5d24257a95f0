#pragma once

// Hypergraph bundles over d labeled vertex blocks. A base edge is a k-subset
// of the blocks {1..d}; a bundle edge picks in addition one label per chosen
// block (label l in 1..n_i for block i). Edges keep their entries sorted by
// block and compare structurally; base edges and edges are distinct types
// with an explicit projection between them.

#include <cstdint>
#include <string>
#include <vector>

namespace confcount::hg {

struct BundleSpec {
  std::uint32_t d = 0;
  std::uint32_t k = 0;
  std::vector<std::uint32_t> mult;  // n_1..n_d, all >= 1

  BundleSpec(std::uint32_t d_, std::uint32_t k_, std::vector<std::uint32_t> mult_);
  // all multiplicities equal, the rectangle case being n = 2
  static BundleSpec uniform(std::uint32_t d_, std::uint32_t k_, std::uint32_t n = 2);
};

struct EdgeEntry {
  std::uint32_t block = 0;  // 1-based
  std::uint32_t label = 0;  // 1-based
  auto operator<=>(const EdgeEntry&) const = default;
};

struct Edge {
  std::vector<EdgeEntry> entries;  // sorted by block, blocks distinct

  explicit Edge(std::vector<EdgeEntry> e);
  Edge() = default;

  std::uint32_t arity() const { return static_cast<std::uint32_t>(entries.size()); }
  bool contains_block(std::uint32_t block) const;
  std::uint32_t label_of(std::uint32_t block) const;  // throws if absent
  auto operator<=>(const Edge&) const = default;
};

struct BaseEdge {
  std::vector<std::uint32_t> blocks;  // sorted, distinct, 1-based

  explicit BaseEdge(std::vector<std::uint32_t> b);
  BaseEdge() = default;

  std::uint32_t arity() const { return static_cast<std::uint32_t>(blocks.size()); }
  auto operator<=>(const BaseEdge&) const = default;
};

// H_{d,k}: all k-subsets of {1..d}, lexicographic.
std::vector<BaseEdge> enumerate_base(std::uint32_t d, std::uint32_t k);

// H_{d,k}^{n}: all labeled edges, lexicographic; size is
// sum over base edges of the product of the chosen blocks' multiplicities.
std::vector<Edge> enumerate_bundle(const BundleSpec& spec);
std::uint64_t bundle_size(const BundleSpec& spec);

// The k subsets of size k-1 of e', lexicographic. For k = 1 this is the
// single empty base edge.
std::vector<BaseEdge> boundary(const BaseEdge& e);

BaseEdge projection(const Edge& e);

// Drops the entry of the given block; the block must be present.
Edge remove_entry(const Edge& e, std::uint32_t block);

// Text form "d.k:[i:l,...]", e.g. "3.2:[1:2,3:1]".
std::string to_string(const Edge& e, std::uint32_t d);
// Parses the text form; returns the edge and checks it against d and k.
Edge parse_edge(const std::string& text);

}  // namespace confcount::hg
