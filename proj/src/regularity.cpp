#include "confcount/regularity.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include "confcount/kernels.hpp"

namespace confcount::reg {

namespace {

constexpr double kBoundTol = 1e-12;

std::size_t pow_size(std::size_t base, std::uint32_t exp) {
  std::size_t n = 1;
  for (std::uint32_t i = 0; i < exp; ++i) n *= base;
  return n;
}

}  // namespace

Partition Partition::trivial(GridSpace ground) {
  Partition p;
  p.ground_ = ground;
  p.labels_.assign(ground.size(), 0);
  p.atom_count_ = 1;
  return p;
}

void Partition::refine_with(const std::vector<std::uint8_t>& set) {
  if (set.size() != labels_.size())
    throw std::invalid_argument("Partition::refine_with: set size mismatch");
  // provisional label = old * 2 + membership, then compress ids by first
  // occurrence so they stay contiguous
  std::vector<std::uint32_t> remap(static_cast<std::size_t>(atom_count_) * 2,
                                   UINT32_MAX);
  std::uint32_t next = 0;
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    const std::uint32_t provisional = labels_[i] * 2 + (set[i] != 0 ? 1 : 0);
    if (remap[provisional] == UINT32_MAX) remap[provisional] = next++;
    labels_[i] = remap[provisional];
  }
  atom_count_ = next;
  generators_.push_back(set);
}

PartitionSystem::PartitionSystem(ff::PrimeField field, std::uint32_t d, std::uint32_t k)
    : q_(field.q), d_(d), k_(k) {
  if (k < 1 || k > d) throw std::invalid_argument("PartitionSystem: need 1 <= k <= d");
  boundary_edges_ = hg::enumerate_base(d, k - 1);
  parts_.reserve(boundary_edges_.size());
  for (const auto& e : boundary_edges_)
    parts_.push_back(Partition::trivial(GridSpace{q_, 2 * e.arity()}));
}

std::size_t PartitionSystem::index_of(const hg::BaseEdge& e) const {
  auto it = std::lower_bound(boundary_edges_.begin(), boundary_edges_.end(), e);
  if (it == boundary_edges_.end() || !(*it == e))
    throw std::out_of_range("PartitionSystem: no partition for that base edge");
  return static_cast<std::size_t>(it - boundary_edges_.begin());
}

const Partition& PartitionSystem::part(const hg::BaseEdge& e) const {
  return parts_[index_of(e)];
}

void PartitionSystem::refine(const hg::BaseEdge& e, const std::vector<std::uint8_t>& set) {
  parts_[index_of(e)].refine_with(set);
}

namespace {

// Grouping of V_{e'} points into joint atoms of the boundary join.
struct JointAtoms {
  std::vector<std::uint32_t> code;  // per point
  std::size_t atom_space;           // product of the boundary atom counts
};

JointAtoms joint_atoms(const hg::BaseEdge& e, const PartitionSystem& sys,
                       std::size_t n_block, std::size_t n_points) {
  const std::uint32_t k = e.arity();
  const auto bnd = hg::boundary(e);
  std::vector<const Partition*> parts;
  std::vector<std::uint32_t> dropped;  // position of the block missing from bnd[i]
  for (const auto& f : bnd) {
    parts.push_back(&sys.part(f));
    std::uint32_t pos = 0;
    while (pos < k && std::binary_search(f.blocks.begin(), f.blocks.end(), e.blocks[pos]))
      ++pos;
    dropped.push_back(pos);
  }

  JointAtoms out;
  out.atom_space = 1;
  for (const auto* p : parts) out.atom_space *= p->atom_count();
  out.code.resize(n_points);

  std::vector<std::size_t> digits(k);
  for (std::size_t idx = 0; idx < n_points; ++idx) {
    std::size_t rest = idx;
    for (std::uint32_t p = 0; p < k; ++p) {
      digits[p] = rest % n_block;
      rest /= n_block;
    }
    std::uint32_t code = 0;
    for (std::size_t i = 0; i < parts.size(); ++i) {
      std::size_t proj = 0;
      for (std::uint32_t p = k; p-- > 0;)
        if (p != dropped[i]) proj = proj * n_block + digits[p];
      code = code * parts[i]->atom_count() + parts[i]->label(proj);
    }
    out.code[idx] = code;
  }
  return out;
}

}  // namespace

ff::FieldFunction cond_exp(const ff::FieldFunction& f, const hg::BaseEdge& e,
                           const PartitionSystem& sys) {
  const std::uint32_t k = e.arity();
  if (f.m() != 2 * k) throw std::invalid_argument("cond_exp: dimension mismatch");
  const std::size_t n_block = static_cast<std::size_t>(f.q()) * f.q();
  const auto atoms = joint_atoms(e, sys, n_block, f.size());

  std::vector<double> sum(atoms.atom_space, 0.0);
  std::vector<std::size_t> count(atoms.atom_space, 0);
  for (std::size_t i = 0; i < f.size(); ++i) {
    sum[atoms.code[i]] += f[i];
    count[atoms.code[i]] += 1;
  }
  ff::FieldFunction out(ff::PrimeField(f.q()), f.m());
  for (std::size_t i = 0; i < f.size(); ++i)
    out[i] = sum[atoms.code[i]] / static_cast<double>(count[atoms.code[i]]);
  return out;
}

double energy(const ff::FieldFunction& f, const hg::BaseEdge& e,
              const PartitionSystem& sys) {
  const std::uint32_t k = e.arity();
  if (f.m() != 2 * k) throw std::invalid_argument("energy: dimension mismatch");
  const std::size_t n_block = static_cast<std::size_t>(f.q()) * f.q();
  const auto atoms = joint_atoms(e, sys, n_block, f.size());

  std::vector<double> sum(atoms.atom_space, 0.0);
  std::vector<std::size_t> count(atoms.atom_space, 0);
  for (std::size_t i = 0; i < f.size(); ++i) {
    sum[atoms.code[i]] += f[i];
    count[atoms.code[i]] += 1;
  }
  double total = 0.0;
  for (std::size_t a = 0; a < atoms.atom_space; ++a)
    if (count[a] > 0) total += sum[a] * sum[a] / static_cast<double>(count[a]);
  return total / static_cast<double>(f.size());
}

namespace {

// candidate level sets of h: ({h >= theta}, {h <= theta}) at every distinct
// attained value theta, supersets first, each direction by ascending theta
std::vector<std::vector<std::uint8_t>> level_set_candidates(const std::vector<double>& h) {
  std::vector<double> values(h);
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  std::vector<std::vector<std::uint8_t>> out;
  out.reserve(2 * values.size());
  for (double theta : values) {
    std::vector<std::uint8_t> super(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) super[i] = h[i] >= theta ? 1 : 0;
    out.push_back(std::move(super));
  }
  for (double theta : values) {
    std::vector<std::uint8_t> sub(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) sub[i] = h[i] <= theta ? 1 : 0;
    out.push_back(std::move(sub));
  }
  return out;
}

// A(x') = E_x prod over all label patterns of g(mix(x, x')), for every
// co-slice x'. k = 2 uses two Gram-style matrix products; general k is the
// direct sum.
std::vector<double> coslice_averages(const ff::FieldFunction& g, std::uint32_t k,
                                     std::size_t n_block) {
  const std::size_t n_points = g.size();
  std::vector<double> a(n_points, 0.0);
  if (k == 2) {
    // rt[x0*n + x1] = g(x0, x1): the x1-lines are contiguous
    std::vector<double> rt(n_points);
    for (std::size_t x1 = 0; x1 < n_block; ++x1)
      for (std::size_t x0 = 0; x0 < n_block; ++x0)
        rt[x0 * n_block + x1] = g[x0 + x1 * n_block];
    // c[x0][x0'] = sum_{x1} g(x0,x1) g(x0',x1)
    std::vector<double> c(n_block * n_block);
    for (std::size_t y = 0; y < n_block; ++y)
      for (std::size_t yp = 0; yp < n_block; ++yp)
        c[y * n_block + yp] = y <= yp
            ? kern::dot(rt.data() + y * n_block, rt.data() + yp * n_block, n_block)
            : c[yp * n_block + y];
    // A(x0',x1') = g(x0',x1') * sum_{x0} c[x0][x0'] g(x0,x1') / n^2
    for (std::size_t x0p = 0; x0p < n_block; ++x0p) {
      for (std::size_t x1p = 0; x1p < n_block; ++x1p) {
        // D = sum_{x0} C0[x0][x0'] g(x0, x1')
        double d = 0.0;
        for (std::size_t x0 = 0; x0 < n_block; ++x0)
          d += c[x0 * n_block + x0p] * g[x0 + x1p * n_block];
        a[x0p + x1p * n_block] = g[x0p + x1p * n_block] * d /
                                 (static_cast<double>(n_block) * n_block);
      }
    }
    return a;
  }
  // direct sum for other k
  const std::uint32_t patterns = 1u << k;
  std::vector<std::size_t> cos(k), x(k);
  for (std::size_t ci = 0; ci < n_points; ++ci) {
    std::size_t rest = ci;
    for (std::uint32_t p = 0; p < k; ++p) {
      cos[p] = rest % n_block;
      rest /= n_block;
    }
    double acc = 0.0;
    std::fill(x.begin(), x.end(), 0);
    for (;;) {
      double term = 1.0;
      for (std::uint32_t mask = 0; mask < patterns && term != 0.0; ++mask) {
        std::size_t idx = 0;
        for (std::uint32_t p = k; p-- > 0;)
          idx = idx * n_block + (((mask >> p) & 1u) != 0 ? cos[p] : x[p]);
        term *= g[idx];
      }
      acc += term;
      std::uint32_t p = 0;
      while (p < k && ++x[p] == n_block) x[p++] = 0;
      if (p == k) break;
    }
    a[ci] = acc / static_cast<double>(n_points);
  }
  return a;
}

struct ComboResult {
  std::vector<std::vector<std::uint8_t>> sets;  // indexed by dropped position p
  double correlation = -1.0;
};

// h[p] is the partial product over the patterns whose lowest fixed position
// is p; B_p runs over level sets of h[p].
std::vector<std::vector<double>> partial_products(const ff::FieldFunction& g,
                                                  std::uint32_t k, std::size_t n_block,
                                                  const std::vector<std::size_t>& cos) {
  const std::size_t n_sub = pow_size(n_block, k - 1);
  std::vector<std::vector<double>> h(k, std::vector<double>(n_sub, 1.0));
  std::vector<std::size_t> sub(k > 1 ? k - 1 : 1);
  for (std::uint32_t mask = 1; mask < (1u << k); ++mask) {
    const std::uint32_t pstar = static_cast<std::uint32_t>(std::countr_zero(mask));
    auto& hp = h[pstar];
    for (std::size_t si = 0; si < n_sub; ++si) {
      std::size_t rest = si;
      for (std::uint32_t p = 0; p + 1 < k; ++p) {
        sub[p] = rest % n_block;
        rest /= n_block;
      }
      // assemble the full index: position p < pstar uses sub[p], p > pstar
      // uses sub[p-1]; fixed positions take the co-slice value
      std::size_t idx = 0;
      for (std::uint32_t p = k; p-- > 0;) {
        std::size_t coord;
        if (((mask >> p) & 1u) != 0)
          coord = cos[p];
        else
          coord = sub[p < pstar ? p : p - 1];
        idx = idx * n_block + coord;
      }
      hp[si] *= g[idx];
    }
  }
  return h;
}

ComboResult best_combo_k2(const ff::FieldFunction& g, std::size_t n_block,
                          const std::vector<std::vector<double>>& h) {
  // corr(B0, B1) = |E g(x0,x1) 1_{B1}(x0) 1_{B0}(x1)|; B_p is a level set of
  // h[p], a table over the complementary position.
  const auto cand0 = level_set_candidates(h[0]);  // sets over x1
  const auto cand1 = level_set_candidates(h[1]);  // sets over x0
  ComboResult best;
  std::vector<double> v(n_block);
  for (const auto& b0 : cand0) {
    for (std::size_t x0 = 0; x0 < n_block; ++x0) {
      double s = 0.0;
      for (std::size_t x1 = 0; x1 < n_block; ++x1)
        if (b0[x1] != 0) s += g[x0 + x1 * n_block];
      v[x0] = s;
    }
    for (const auto& b1 : cand1) {
      double s = 0.0;
      for (std::size_t x0 = 0; x0 < n_block; ++x0)
        if (b1[x0] != 0) s += v[x0];
      const double corr = std::fabs(s) / static_cast<double>(g.size());
      if (corr > best.correlation) {
        best.correlation = corr;
        best.sets = {b0, b1};
      }
    }
  }
  return best;
}

ComboResult best_combo_general(const ff::FieldFunction& g, std::uint32_t k,
                               std::size_t n_block,
                               const std::vector<std::vector<double>>& h) {
  // coordinate ascent over the level-set candidates, starting from the full
  // sets; each pass re-picks the best candidate for one position with the
  // others held fixed, which is monotone in the correlation
  const std::size_t n_sub = pow_size(n_block, k - 1);
  std::vector<std::vector<std::vector<std::uint8_t>>> cand(k);
  for (std::uint32_t p = 0; p < k; ++p) cand[p] = level_set_candidates(h[p]);

  ComboResult cur;
  cur.sets.assign(k, std::vector<std::uint8_t>(n_sub, 1));
  cur.correlation = 0.0;

  // membership weight of each point given the sets of every position but p
  std::vector<double> w(n_sub);
  std::vector<std::size_t> x(k);
  for (std::uint32_t round = 0; round < 2 * k + 2; ++round) {
    bool changed = false;
    for (std::uint32_t p = 0; p < k; ++p) {
      std::fill(w.begin(), w.end(), 0.0);
      std::fill(x.begin(), x.end(), 0);
      for (std::size_t idx = 0;; ++idx) {
        double term = g[idx];
        if (term != 0.0) {
          for (std::uint32_t pp = 0; pp < k && term != 0.0; ++pp) {
            if (pp == p) continue;
            std::size_t proj = 0;
            for (std::uint32_t r = k; r-- > 0;)
              if (r != pp) proj = proj * n_block + x[r];
            term *= cur.sets[pp][proj];
          }
        }
        if (term != 0.0) {
          std::size_t proj = 0;
          for (std::uint32_t r = k; r-- > 0;)
            if (r != p) proj = proj * n_block + x[r];
          w[proj] += term;
        }
        std::uint32_t s = 0;
        while (s < k && ++x[s] == n_block) x[s++] = 0;
        if (s == k) break;
      }
      double best_corr = -1.0;
      const std::vector<std::uint8_t>* best_set = nullptr;
      for (const auto& b : cand[p]) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n_sub; ++i)
          if (b[i] != 0) acc += w[i];
        const double corr = std::fabs(acc) / static_cast<double>(g.size());
        if (corr > best_corr) {
          best_corr = corr;
          best_set = &b;
        }
      }
      if (best_set != nullptr && best_corr > cur.correlation + 1e-15) {
        cur.sets[p] = *best_set;
        cur.correlation = best_corr;
        changed = true;
      }
    }
    if (!changed) break;
  }
  return cur;
}

}  // namespace

std::optional<Witness> witness_search(const ff::FieldFunction& g,
                                      const hg::BaseEdge& e, double eps) {
  const std::uint32_t k = e.arity();
  if (g.m() != 2 * k) throw std::invalid_argument("witness_search: dimension mismatch");
  if (g.max_abs() > 2.0 + kBoundTol)
    throw std::invalid_argument("witness_search: function must be bounded by 2");
  const double threshold =
      std::pow(2.0, -static_cast<double>(k)) *
      std::pow(eps, static_cast<double>(std::size_t{1} << k));

  if (k == 1) {
    const double corr = std::fabs(g.mean());
    if (corr < threshold) return std::nullopt;
    Witness w;
    w.sets = {std::vector<std::uint8_t>{1}};  // the full one-point space
    w.correlation = corr;
    return w;
  }

  const std::size_t n_block = static_cast<std::size_t>(g.q()) * g.q();
  const auto a = coslice_averages(g, k, n_block);
  std::vector<std::size_t> order(a.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
    return std::fabs(a[l]) > std::fabs(a[r]);
  });

  std::vector<std::size_t> cos(k);
  for (std::size_t ci : order) {
    std::size_t rest = ci;
    for (std::uint32_t p = 0; p < k; ++p) {
      cos[p] = rest % n_block;
      rest /= n_block;
    }
    const auto h = partial_products(g, k, n_block, cos);
    const ComboResult best = k == 2 ? best_combo_k2(g, n_block, h)
                                    : best_combo_general(g, k, n_block, h);
    if (best.correlation >= threshold) {
      Witness w;
      w.correlation = best.correlation;
      // boundary order drops the last block first: sets[i] = B_{k-1-i}
      w.sets.resize(k);
      for (std::uint32_t i = 0; i < k; ++i) w.sets[i] = best.sets[k - 1 - i];
      return w;
    }
  }
  return std::nullopt;
}

RegularizeResult weak_regularize(const forms::EdgeFunctionFamily& fam, double eps) {
  if (!(eps > 0.0))
    throw std::invalid_argument("weak_regularize: eps must be positive");
  if (eps > 1.0) {
    std::fprintf(stderr, "confcount: weak_regularize eps=%g clamped to 1\n", eps);
    eps = 1.0;
  }
  const std::uint32_t d = fam.d(), k = fam.k();
  const std::size_t n_edges = fam.edge_count();
  const double cap_d = std::ceil(static_cast<double>(n_edges) *
                                 std::pow(2.0, 2.0 * k) *
                                 std::pow(eps, -static_cast<double>(std::size_t{1} << (k + 1)))) + 1.0;
  const std::uint64_t cap = static_cast<std::uint64_t>(cap_d);

  RegularizeResult res{PartitionSystem(ff::PrimeField(fam.q()), d, k), 0, {}, {}};
  std::vector<hg::BaseEdge> proj;
  proj.reserve(n_edges);
  for (std::size_t i = 0; i < n_edges; ++i) proj.push_back(hg::projection(fam.edge(i)));

  auto total_energy = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n_edges; ++i) s += energy(fam.fn(i), proj[i], res.system);
    return s;
  };
  res.energy_trace.push_back(total_energy());

  for (;;) {
    std::vector<double> boxes(n_edges);
    std::vector<ff::FieldFunction> residuals;
    residuals.reserve(n_edges);
    for (std::size_t i = 0; i < n_edges; ++i) {
      ff::FieldFunction r = fam.fn(i);
      const auto ce = cond_exp(fam.fn(i), proj[i], res.system);
      for (std::size_t p = 0; p < r.size(); ++p) r[p] -= ce[p];
      boxes[i] = forms::box_norm(r, k);
      residuals.push_back(std::move(r));
    }
    std::size_t worst = 0;
    for (std::size_t i = 1; i < n_edges; ++i)
      if (boxes[i] > boxes[worst]) worst = i;
    if (boxes[worst] <= eps) {
      res.final_box_norms = boxes;
      break;
    }
    if (res.iterations >= cap)
      throw std::logic_error("weak_regularize: iteration cap exceeded");

    const auto w = witness_search(residuals[worst], proj[worst], eps);
    if (!w)
      throw std::runtime_error(
          "weak_regularize: no witness met the guaranteed correlation bound");
    const auto bnd = hg::boundary(proj[worst]);
    for (std::size_t i = 0; i < bnd.size(); ++i)
      res.system.refine(bnd[i], w->sets[i]);
    ++res.iterations;
    res.energy_trace.push_back(total_energy());
  }
  return res;
}

}  // namespace confcount::reg
