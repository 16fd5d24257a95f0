#include "confcount/hypergraph.hpp"

#include <algorithm>
#include <stdexcept>

namespace confcount::hg {

BundleSpec::BundleSpec(std::uint32_t d_, std::uint32_t k_,
                       std::vector<std::uint32_t> mult_)
    : d(d_), k(k_), mult(std::move(mult_)) {
  if (d < 1 || k < 1 || k > d)
    throw std::invalid_argument("BundleSpec: need 1 <= k <= d");
  if (mult.size() != d)
    throw std::invalid_argument("BundleSpec: need one multiplicity per block");
  for (auto n : mult)
    if (n < 1) throw std::invalid_argument("BundleSpec: multiplicities must be >= 1");
}

BundleSpec BundleSpec::uniform(std::uint32_t d_, std::uint32_t k_, std::uint32_t n) {
  return BundleSpec(d_, k_, std::vector<std::uint32_t>(d_, n));
}

Edge::Edge(std::vector<EdgeEntry> e) : entries(std::move(e)) {
  std::sort(entries.begin(), entries.end());
  for (std::size_t i = 1; i < entries.size(); ++i)
    if (entries[i].block == entries[i - 1].block)
      throw std::invalid_argument("Edge: blocks must be distinct");
}

bool Edge::contains_block(std::uint32_t block) const {
  for (const auto& e : entries)
    if (e.block == block) return true;
  return false;
}

std::uint32_t Edge::label_of(std::uint32_t block) const {
  for (const auto& e : entries)
    if (e.block == block) return e.label;
  throw std::out_of_range("Edge: block not present");
}

BaseEdge::BaseEdge(std::vector<std::uint32_t> b) : blocks(std::move(b)) {
  std::sort(blocks.begin(), blocks.end());
  for (std::size_t i = 1; i < blocks.size(); ++i)
    if (blocks[i] == blocks[i - 1])
      throw std::invalid_argument("BaseEdge: blocks must be distinct");
}

std::vector<BaseEdge> enumerate_base(std::uint32_t d, std::uint32_t k) {
  std::vector<BaseEdge> out;
  if (k == 0) {
    out.emplace_back();
    return out;
  }
  std::vector<std::uint32_t> pick(k);
  // next k-combination of {1..d} in lexicographic order
  for (std::uint32_t i = 0; i < k; ++i) pick[i] = i + 1;
  for (;;) {
    out.emplace_back(pick);
    std::uint32_t i = k;
    while (i > 0 && pick[i - 1] == d - k + i) --i;
    if (i == 0) break;
    ++pick[i - 1];
    for (std::uint32_t j = i; j < k; ++j) pick[j] = pick[j - 1] + 1;
  }
  return out;
}

std::vector<Edge> enumerate_bundle(const BundleSpec& spec) {
  std::vector<Edge> out;
  for (const auto& base : enumerate_base(spec.d, spec.k)) {
    // odometer over the labels of the chosen blocks
    std::vector<std::uint32_t> label(spec.k, 1);
    for (;;) {
      std::vector<EdgeEntry> entries(spec.k);
      for (std::uint32_t i = 0; i < spec.k; ++i)
        entries[i] = {base.blocks[i], label[i]};
      out.emplace_back(std::move(entries));
      std::uint32_t pos = spec.k;
      while (pos > 0) {
        --pos;
        if (label[pos] < spec.mult[base.blocks[pos] - 1]) {
          ++label[pos];
          for (std::uint32_t j = pos + 1; j < spec.k; ++j) label[j] = 1;
          break;
        }
        if (pos == 0) {
          label.clear();
          break;
        }
      }
      if (label.empty()) break;
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::uint64_t bundle_size(const BundleSpec& spec) {
  std::uint64_t total = 0;
  for (const auto& base : enumerate_base(spec.d, spec.k)) {
    std::uint64_t prod = 1;
    for (auto b : base.blocks) prod *= spec.mult[b - 1];
    total += prod;
  }
  return total;
}

std::vector<BaseEdge> boundary(const BaseEdge& e) {
  if (e.arity() < 1) throw std::invalid_argument("boundary: edge must have arity >= 1");
  std::vector<BaseEdge> out;
  // removing the largest block first yields lexicographic order of the
  // remaining subsets
  for (std::size_t drop = e.blocks.size(); drop-- > 0;) {
    std::vector<std::uint32_t> rest;
    rest.reserve(e.blocks.size() - 1);
    for (std::size_t i = 0; i < e.blocks.size(); ++i)
      if (i != drop) rest.push_back(e.blocks[i]);
    out.emplace_back(std::move(rest));
  }
  return out;
}

BaseEdge projection(const Edge& e) {
  std::vector<std::uint32_t> blocks;
  blocks.reserve(e.entries.size());
  for (const auto& entry : e.entries) blocks.push_back(entry.block);
  return BaseEdge(std::move(blocks));
}

Edge remove_entry(const Edge& e, std::uint32_t block) {
  if (!e.contains_block(block))
    throw std::out_of_range("remove_entry: block not present in edge");
  std::vector<EdgeEntry> rest;
  rest.reserve(e.entries.size() - 1);
  for (const auto& entry : e.entries)
    if (entry.block != block) rest.push_back(entry);
  return Edge(std::move(rest));
}

std::string to_string(const Edge& e, std::uint32_t d) {
  std::string s = std::to_string(d) + "." + std::to_string(e.arity()) + ":[";
  for (std::size_t i = 0; i < e.entries.size(); ++i) {
    if (i > 0) s += ',';
    s += std::to_string(e.entries[i].block) + ":" + std::to_string(e.entries[i].label);
  }
  s += ']';
  return s;
}

Edge parse_edge(const std::string& text) {
  auto bad = [&] { return std::invalid_argument("parse_edge: bad edge text: " + text); };
  std::size_t dot = text.find('.');
  std::size_t colon = text.find(':', dot == std::string::npos ? 0 : dot);
  if (dot == std::string::npos || colon == std::string::npos) throw bad();
  std::uint32_t d = static_cast<std::uint32_t>(std::stoul(text.substr(0, dot)));
  std::uint32_t k = static_cast<std::uint32_t>(std::stoul(text.substr(dot + 1, colon - dot - 1)));
  if (colon + 1 >= text.size() || text[colon + 1] != '[' || text.back() != ']') throw bad();
  std::string body = text.substr(colon + 2, text.size() - colon - 3);
  std::vector<EdgeEntry> entries;
  std::size_t pos = 0;
  while (pos < body.size()) {
    std::size_t comma = body.find(',', pos);
    std::string item = body.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    std::size_t sep = item.find(':');
    if (sep == std::string::npos) throw bad();
    std::uint32_t block = static_cast<std::uint32_t>(std::stoul(item.substr(0, sep)));
    std::uint32_t label = static_cast<std::uint32_t>(std::stoul(item.substr(sep + 1)));
    if (block < 1 || block > d || label < 1) throw bad();
    entries.push_back({block, label});
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  Edge e(std::move(entries));
  if (e.arity() != k) throw bad();
  return e;
}

}  // namespace confcount::hg
