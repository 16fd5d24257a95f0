// Acceptance suite: one entry per criterion, each with its tolerance pinned
// here. Every line prints measured value, threshold and verdict; the suite
// is reachable both from ctest and the CLI `acceptance` subcommand.

#include <cmath>
#include <sstream>

#include "confcount/dft.hpp"
#include "confcount/forms.hpp"
#include "confcount/harness.hpp"
#include "confcount/lattice.hpp"
#include "confcount/regularity.hpp"

namespace confcount::harness {

namespace {

AcceptanceLine crit1_fourier_identity() {
  double max_diff = 0.0;
  for (std::uint32_t q : {3u, 5u, 7u, 11u}) {
    ff::PrimeField field(q);
    Rng rng(0xC0FFEE00 + q);
    for (std::uint32_t trial = 0; trial < 20; ++trial) {
      const std::uint32_t t = 1 + trial % (q - 1);
      auto f1 = random_bounded(field, 2, rng);
      auto f2 = random_bounded(field, 2, rng);
      forms::EdgeFunctionFamily fam(field, 1, 1);
      fam.set(0, f1);
      fam.set(1, f2);
      forms::ConfigurationSpace space(field, 1, {t});
      const double direct = forms::eval_N(space, fam);
      const double fourier = forms::fourier_count_d1(field, t, f1, f2);
      max_diff = std::max(max_diff, std::fabs(direct - fourier));
    }
  }
  return {"1. exact Fourier counting identity (d=1)", max_diff <= 1e-9, max_diff,
          1e-9, "max |direct - frequency side| over q in {3,5,7,11}, 20 pairs each"};
}

AcceptanceLine crit2_sphere_decay() {
  double worst = 0.0;
  std::uint32_t worst_q = 0, worst_t = 0;
  for (std::uint32_t q = 3; q <= 101; ++q) {
    if (!ff::is_prime(q)) continue;
    ff::PrimeField field(q);
    for (std::uint32_t t = 1; t < q; ++t) {
      const auto decay = ff::sphere_decay(field, t);
      const double v = std::max(decay.mean_deviation, decay.max_decay_const);
      if (v > worst) {
        worst = v;
        worst_q = q;
        worst_t = t;
      }
    }
  }
  std::ostringstream detail;
  detail << "worst at q=" << worst_q << " t=" << worst_t
         << "; bound on sqrt(q)-scaled mean deviation and nonzero-mode max";
  return {"2. sphere decay envelope (all primes q <= 101)", worst <= 3.0, worst,
          3.0, detail.str()};
}

AcceptanceLine crit3_m_lower_bound() {
  double min_margin = 1.0;
  Rng rng(0xC0FFEE33);
  for (std::uint32_t d : {1u, 2u}) {
    for (std::uint32_t q : {3u, 5u, 7u}) {
      ff::PrimeField field(q);
      for (std::uint32_t trial = 0; trial < 17; ++trial) {
        const double density = 0.1 + 0.8 * rng.uniform01();
        const auto indicator = random_indicator(field, 2 * d, density, rng);
        forms::EdgeFunctionFamily fam(field, d, d);
        for (std::size_t i = 0; i < fam.edge_count(); ++i) fam.set(i, indicator);
        const double m = forms::eval_M(fam);
        const double lower =
            std::pow(indicator.mean(), static_cast<double>(1u << d));
        min_margin = std::min(min_margin, m - lower);
      }
    }
  }
  return {"3. unconditional M lower bound (102 random sets)",
          min_margin >= -1e-12, min_margin, -1e-12,
          "min of M(1_S) - (|S|/q^{2d})^{2^d}; must not drop below -1e-12"};
}

AcceptanceLine crit4_gowers_cauchy_schwarz() {
  double max_excess = -1.0;
  Rng rng(0xC0FFEE44);
  for (std::uint32_t q : {3u, 5u}) {
    ff::PrimeField field(q);
    for (std::uint32_t trial = 0; trial < 50; ++trial) {
      forms::EdgeFunctionFamily fam(field, 2, 2);
      for (std::size_t i = 0; i < fam.edge_count(); ++i)
        fam.set(i, random_bounded(field, 4, rng));
      const auto cs = forms::gowers_cs_check(fam);
      max_excess = std::max(max_excess, cs.lhs - cs.rhs);
    }
  }
  return {"4. Gowers-Cauchy-Schwarz (100 random families)", max_excess <= 1e-9,
          max_excess, 1e-9, "max of |M| - min box norm over d=k=2, q in {3,5}"};
}

AcceptanceLine crit5_counting_convergence() {
  const std::vector<std::uint32_t> qs = {5, 7, 11, 13, 17};
  std::vector<double> scaled;
  for (std::uint32_t q : qs) {
    ff::PrimeField field(q);
    Rng rng(0xC0FFEE55 + q);
    const auto indicator = random_indicator(field, 4, 0.5, rng);
    forms::ConfigurationSpace space(field, 2, {1, 1});
    const auto gap = forms::counting_gap(space, indicator);
    scaled.push_back(gap.gap * std::sqrt(static_cast<double>(q)));
  }
  double max_small = 0.0;
  for (std::size_t i = 0; i + 1 < scaled.size(); ++i)
    max_small = std::max(max_small, scaled[i]);
  const double ratio = scaled.back() / max_small;
  std::ostringstream detail;
  detail << "gap*sqrt(q) =";
  for (std::size_t i = 0; i < qs.size(); ++i)
    detail << ' ' << qs[i] << ':' << scaled[i];
  return {"5. counting-lemma convergence (d=2, density 1/2)", ratio <= 1.25,
          ratio, 1.25, detail.str()};
}

AcceptanceLine crit6_regularity() {
  const double eps = 0.25;
  const std::uint32_t q = 7;
  const double min_gain_bound = std::pow(2.0, -4.0) * std::pow(eps, 8.0) - 1e-12;
  const std::uint64_t cap = static_cast<std::uint64_t>(
      std::ceil(4.0 * 16.0 * std::pow(eps, -8.0))) + 1;

  ff::PrimeField field(q);
  double max_residual = 0.0;
  double min_gain = 1.0;
  std::uint64_t max_iterations = 0;
  bool ok = true;
  for (std::uint32_t fam_idx = 0; fam_idx < 10; ++fam_idx) {
    Rng rng(0xC0FFEE66 + fam_idx);
    forms::EdgeFunctionFamily fam(field, 2, 2);
    for (std::size_t i = 0; i < fam.edge_count(); ++i)
      fam.set(i, random_signs(field, 4, rng));
    const auto res = reg::weak_regularize(fam, eps);
    max_iterations = std::max(max_iterations, res.iterations);
    if (res.iterations > cap) ok = false;
    // independent re-verification of the postcondition
    for (std::size_t i = 0; i < fam.edge_count(); ++i) {
      const auto pe = hg::projection(fam.edge(i));
      const auto ce = reg::cond_exp(fam.fn(i), pe, res.system);
      ff::FieldFunction r = fam.fn(i);
      for (std::size_t p = 0; p < r.size(); ++p) r[p] -= ce[p];
      max_residual = std::max(max_residual, forms::box_norm(r, 2));
    }
    for (std::size_t s = 1; s < res.energy_trace.size(); ++s)
      min_gain = std::min(min_gain, res.energy_trace[s] - res.energy_trace[s - 1]);
  }
  if (max_residual > eps) ok = false;
  if (min_gain < min_gain_bound) ok = false;
  std::ostringstream detail;
  detail << "max re-verified residual box norm " << max_residual << " (<= " << eps
         << "), max iterations " << max_iterations << " (cap " << cap
         << "), min per-step energy gain vs bound " << min_gain_bound;
  return {"6. regularity algorithm (10 random +-1 families, q=7, eps=0.25)", ok,
          min_gain, min_gain_bound, detail.str()};
}

AcceptanceLine crit7_lattice_oracle() {
  std::uint64_t discrepancies = 0;
  {
    const auto spec = lat::SimplexSpec(5, {lat::Point(5, 0), {1, 0, 0, 0, 0}});
    for (std::int64_t l2 = 1; l2 <= 9; ++l2) {
      std::int64_t b = 0;
      while (b * b < l2) ++b;
      if (lat::enumerate_copies(spec, l2, 1, b) !=
          lat::enumerate_copies_naive(spec, l2, 1, b))
        ++discrepancies;
    }
  }
  {
    const auto spec =
        lat::SimplexSpec(5, {lat::Point(5, 0), {1, 0, 0, 0, 0}, {0, 1, 0, 0, 0}});
    for (std::int64_t l2 = 1; l2 <= 4; ++l2) {
      std::int64_t b = 0;
      while (b * b < l2) ++b;
      if (lat::enumerate_copies(spec, l2, 1, b) !=
          lat::enumerate_copies_naive(spec, l2, 1, b))
        ++discrepancies;
    }
  }
  return {"7. lattice enumeration equals the box brute force", discrepancies == 0,
          static_cast<double>(discrepancies), 0.0,
          "segments in Z^5 (lambda^2 <= 9) and orthonormal right triangles in "
          "Z^5 (lambda^2 <= 4), exact tuple lists"};
}

AcceptanceLine crit8_scan_stability() {
  const auto spec = lat::SimplexSpec(5, {lat::Point(5, 0), {1, 0, 0, 0, 0}});
  const auto rows = lat::count_asymptotic_scan(spec, 1, 4, 400);
  double lo = 1e300, hi = 0.0;
  for (const auto& r : rows) {
    lo = std::min(lo, r.normalized);
    hi = std::max(hi, r.normalized);
  }
  const double ratio = hi / lo;
  std::ostringstream detail;
  detail << "r_5(lambda^2)/lambda^3 over lambda^2 in [4,400]: min " << lo
         << ", max " << hi;
  return {"8. asymptotic count stability (segments in Z^5)", ratio <= 4.0, ratio,
          4.0, detail.str()};
}

AcceptanceLine crit9_congruence_obstruction() {
  lat::GridCube window(5, lat::Point(5, 0), 16);
  const auto set = congruence_class_set(window, 2, lat::Point(5, 0));

  // pairwise squared distances of the first 200 members are 0 mod 4
  std::vector<lat::Point> members;
  for (std::size_t idx = 0; idx < window.volume() && members.size() < 200; ++idx)
    if (set.contains(idx)) members.push_back(window.point(idx));
  std::uint64_t violations = 0;
  for (std::size_t i = 0; i < members.size(); ++i)
    for (std::size_t j = i + 1; j < members.size(); ++j) {
      std::int64_t d2 = 0;
      for (std::uint32_t a = 0; a < 5; ++a) {
        const std::int64_t diff = members[i][a] - members[j][a];
        d2 += diff * diff;
      }
      if (d2 % 4 != 0) ++violations;
    }

  const auto spec = lat::SimplexSpec(5, {lat::Point(5, 0), {1, 0, 0, 0, 0}});
  std::vector<double> table(window.volume());
  for (std::size_t i = 0; i < table.size(); ++i) table[i] = set.contains(i) ? 1.0 : 0.0;
  const std::vector<std::vector<double>> fs = {table, table};
  double max_n1 = 0.0;
  for (std::int64_t l2 : {1, 9}) {
    const auto v = lat::eval_N1_lattice(spec, 1, l2, window, fs);
    max_n1 = std::max(max_n1, std::fabs(v.value));
  }
  const double measured = max_n1 + static_cast<double>(violations);
  return {"9. congruence obstruction on (2Z)^5", measured == 0.0, measured, 0.0,
          "pairwise |x-y|^2 = 0 mod 4 and N^1 with odd lambda^2 exactly zero"};
}

AcceptanceLine crit10a_uniformity_increment() {
  lat::GridCube window(5, lat::Point(5, 0), 16);
  const auto set = congruence_class_set(window, 2, lat::Point(5, 0));
  const auto rep = lat::uniformity_test(set, 0.1, 2);
  bool ok = !rep.is_uniform && rep.max_relative == 1.0 && rep.overall == 1.0 / 32.0;
  for (auto r : rep.worst_residue)
    if (r != 0) ok = false;
  const auto inc = lat::density_increment(set, 0.1, 2);
  ok = ok && inc.steps == 1 && inc.status == "uniform" &&
       inc.final_set.density() == 1.0;
  std::ostringstream detail;
  detail << "worst relative density " << rep.max_relative << " vs overall "
         << rep.overall << "; increment reached density "
         << inc.final_set.density() << " in " << inc.steps << " step(s)";
  return {"10a. congruence-class uniformity and one-step increment", ok,
          inc.final_set.density(), 1.0, detail.str()};
}

AcceptanceLine crit10b_concentrated_increment() {
  lat::GridCube window(1, lat::Point(1, 0), 6561);
  Rng rng(0xC0FFEEAA);
  const auto set = concentrated_set(window, 3, {1}, 0.3, 0.92, rng);
  const auto inc = lat::density_increment(set, 0.2, 3);
  bool ok = inc.steps >= 1;
  double ratio = 0.0;
  if (!inc.history.empty())
    ratio = inc.history[0].density_after / inc.history[0].density_before;
  ok = ok && ratio >= 2.7;
  std::ostringstream detail;
  detail << "first-step density " << (inc.history.empty() ? 0.0 : inc.history[0].density_before)
         << " -> " << (inc.history.empty() ? 0.0 : inc.history[0].density_after)
         << ", " << inc.steps << " step(s) total";
  return {"10b. concentrated-set increment ratio (mod 3)", ok, ratio, 2.7,
          detail.str()};
}

AcceptanceLine crit10c_kvn_two_scale() {
  const double eps = 0.2;
  const double guarantee_c = 0.12;
  lat::GridCube window(1, lat::Point(1, 0), 8000000);
  const auto set = two_scale_set(window, 800);
  std::vector<double> f(window.volume());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = set.contains(i) ? 0.5 : -0.5;

  lat::ScaleSequence scales(eps, 8, {8000000, 80000, 800, 8});
  const auto res = lat::kvn_grid_decompose(f, window, scales, 1, 2, eps, guarantee_c);

  std::vector<double> resid(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) resid[i] = f[i] - res.cond_table[i];
  const double reverified = lat::u1_norm(resid, window, 8, 8);
  const double gain = res.energy_trace.size() >= 2
                          ? res.energy_trace[1] - res.energy_trace[0]
                          : 0.0;
  const auto guaranteed = static_cast<std::size_t>(std::ceil(guarantee_c / (eps * eps)));
  const bool ok = res.level == 2 && reverified <= eps && gain >= 0.02 &&
                  res.level < guaranteed;
  std::ostringstream detail;
  detail << "succeeded at level " << res.level << " of " << guaranteed
         << " guaranteed; residual U^1 trace:";
  for (double u : res.u1_trace) detail << ' ' << u;
  detail << "; level-1 to level-2 energy gain " << gain << " (>= 0.02)";
  return {"10c. two-scale KvN decomposition (eps=0.2)", ok, reverified, eps,
          detail.str()};
}

}  // namespace

AcceptanceReport acceptance(const std::string& selector, std::ostream& progress) {
  const bool ff = selector == "ff" || selector == "all";
  const bool lattice = selector == "lattice" || selector == "all";
  if (!ff && !lattice)
    throw ConfigError("suite", "unknown selector '" + selector + "' (ff|lattice|all)");

  AcceptanceReport report;
  auto add = [&](AcceptanceLine line) {
    progress << (line.pass ? "[PASS] " : "[FAIL] ") << line.name << '\n';
    progress.flush();
    report.lines.push_back(std::move(line));
  };
  if (ff) {
    add(crit1_fourier_identity());
    add(crit2_sphere_decay());
    add(crit3_m_lower_bound());
    add(crit4_gowers_cauchy_schwarz());
    add(crit5_counting_convergence());
    add(crit6_regularity());
  }
  if (lattice) {
    add(crit7_lattice_oracle());
    add(crit8_scan_stability());
    add(crit9_congruence_obstruction());
    add(crit10a_uniformity_increment());
    add(crit10b_concentrated_increment());
    add(crit10c_kvn_two_scale());
  }
  return report;
}

}  // namespace confcount::harness
