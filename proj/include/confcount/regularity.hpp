#pragma once

// Weak hypergraph regularity by energy increment. Sigma-algebras on the
// vertex-block products V_f' are kept as partitions (atom labelings) whose
// generating sets are stored explicitly, so complexity counts are exact.
// weak_regularize repeatedly finds the edge whose residual
// f_e - E(f_e | join of boundary partitions) has the largest box norm,
// extracts a correlating product set via a deterministic level-set search,
// and refines the boundary partitions with its factors; each accepted step
// raises the total energy by at least the squared correlation, which bounds
// the iteration count.

#include <cstdint>
#include <optional>
#include <vector>

#include "confcount/field.hpp"
#include "confcount/forms.hpp"
#include "confcount/hypergraph.hpp"

namespace confcount::reg {

// F_q^m grid, m = 0 allowed (the one-point space V_of-the-empty-edge).
struct GridSpace {
  std::uint32_t q = 0;
  std::uint32_t m = 0;
  std::size_t size() const {
    std::size_t n = 1;
    for (std::uint32_t i = 0; i < m; ++i) n *= q;
    return n;
  }
};

class Partition {
 public:
  static Partition trivial(GridSpace ground);

  const GridSpace& ground() const { return ground_; }
  std::uint32_t atom_count() const { return atom_count_; }
  std::uint32_t generator_count() const { return static_cast<std::uint32_t>(generators_.size()); }
  std::uint32_t label(std::size_t point) const { return labels_[point]; }

  // Splits every atom along the given set (0/1 table on the ground grid)
  // and records it as a generator. New atom ids are assigned by first
  // occurrence in point order.
  void refine_with(const std::vector<std::uint8_t>& set);

 private:
  GridSpace ground_;
  std::vector<std::uint32_t> labels_;
  std::uint32_t atom_count_ = 1;
  std::vector<std::vector<std::uint8_t>> generators_;
};

// One partition per boundary base edge f' in H_{d,k-1}.
class PartitionSystem {
 public:
  PartitionSystem(ff::PrimeField field, std::uint32_t d, std::uint32_t k);

  std::uint32_t d() const { return d_; }
  std::uint32_t k() const { return k_; }
  std::size_t part_count() const { return parts_.size(); }
  const hg::BaseEdge& boundary_edge(std::size_t i) const { return boundary_edges_[i]; }
  const Partition& part(std::size_t i) const { return parts_[i]; }
  const Partition& part(const hg::BaseEdge& e) const;
  std::size_t index_of(const hg::BaseEdge& e) const;

  void refine(const hg::BaseEdge& e, const std::vector<std::uint8_t>& set);

 private:
  std::uint32_t q_, d_, k_;
  std::vector<hg::BaseEdge> boundary_edges_;
  std::vector<Partition> parts_;
};

// E(f | join of the boundary partitions of e'): constant on each joint atom,
// equal to the mean of f there. f lives on V_{e'}, i.e. f.m() == 2k.
ff::FieldFunction cond_exp(const ff::FieldFunction& f, const hg::BaseEdge& e,
                           const PartitionSystem& sys);

// ||E(f|B)||_2^2, computed from the atom sums.
double energy(const ff::FieldFunction& f, const hg::BaseEdge& e,
              const PartitionSystem& sys);

struct Witness {
  // One set per boundary edge of e' (in boundary() order); sets[i] is a 0/1
  // table on V_{boundary edge i}.
  std::vector<std::vector<std::uint8_t>> sets;
  double correlation;  // |<g, product of the set indicators>|
};

// Level-set witness extraction for ||g||_box >= eps (g bounded by 2): picks
// the co-slice maximizing the inner box average, scans super- and sublevel
// sets of the partial product functions at every attained value, and keeps
// the combination with the largest correlation; if that co-slice misses the
// 2^{-k} eps^{2^k} bound, later co-slices are scanned in descending order.
// Returns a witness only when the bound is met (which may also happen for
// ||g||_box < eps).
std::optional<Witness> witness_search(const ff::FieldFunction& g,
                                      const hg::BaseEdge& e, double eps);

struct RegularizeResult {
  PartitionSystem system;
  std::uint64_t iterations = 0;
  std::vector<double> energy_trace;     // total energy, trace[0] = initial
  std::vector<double> final_box_norms;  // per edge, after the last refinement
};

// Iterates until box_norm(f_e - E(f_e|join)) <= eps for every edge.
// eps must be positive; eps > 1 is clamped to 1 with a warning.
RegularizeResult weak_regularize(const forms::EdgeFunctionFamily& fam, double eps);

}  // namespace confcount::reg
