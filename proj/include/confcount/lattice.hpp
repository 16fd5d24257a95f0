#pragma once

// Integer-lattice simplex machinery: exact Gram-constraint enumeration of
// isometric copies, normalized counting measures, the counting forms N^1 and
// M^1 on finite cubes, U^1_{q,L} uniformity norms, grid sigma-algebras and
// the Koopman-von Neumann level scan, q_epsilon, uniformity testing and the
// density-increment iteration.
//
// Scale parameters lambda live in sqrt(N) and are carried as lambda^2 (an
// integer) throughout; all Gram arithmetic is exact 64-bit integer. Dense
// tables on a window use little-endian coordinate indexing
// (idx = sum_i (x_i - corner_i) * side^i). Reads outside the window are
// zero-extended; operations affected by that report the measured boundary
// deficit instead of hiding it.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace confcount::lat {

using Point = std::vector<std::int64_t>;
using BigInt = boost::multiprecision::cpp_int;

// Non-degenerate simplex v_1 = 0, v_2..v_k in Z^n with Gram matrix
// t_ij = v_i . v_j (2 <= i,j <= k), checked symmetric positive definite.
struct SimplexSpec {
  std::uint32_t n = 0;
  std::vector<Point> points;                       // k points, first is 0
  std::vector<std::vector<std::int64_t>> gram;     // (k-1) x (k-1)

  SimplexSpec(std::uint32_t n_, std::vector<Point> points_);
  std::uint32_t k() const { return static_cast<std::uint32_t>(points.size()); }
  std::int64_t max_t() const;  // max diagonal Gram entry

  std::string to_json() const;
  static SimplexSpec from_json(const std::string& text);
  static SimplexSpec load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
};

// Window [corner, corner+side)^n with grid parameters gap q and scale L,
// q | L and L | side.
struct GridCube {
  std::uint32_t n = 0;
  Point corner;
  std::int64_t side = 0;
  std::int64_t gap = 1;
  std::int64_t scale = 1;

  GridCube(std::uint32_t n_, Point corner_, std::int64_t side_,
           std::int64_t gap_ = 1, std::int64_t scale_ = 1);
  std::size_t volume() const;
  std::size_t index(const Point& p) const;  // p must lie in the window
  Point point(std::size_t index) const;
  bool contains(const Point& p) const;
};

class LatticeSet {
 public:
  LatticeSet(GridCube window, std::vector<std::uint8_t> membership);
  explicit LatticeSet(GridCube window);

  const GridCube& window() const { return window_; }
  const std::vector<std::uint8_t>& membership() const { return member_; }
  bool contains(std::size_t idx) const { return member_[idx] != 0; }
  void set(std::size_t idx, bool in) { member_[idx] = in ? 1 : 0; }
  std::size_t count() const;
  double density() const;

  // "latticeset v1" header plus a run-length-encoded bit table
  void save(const std::filesystem::path& path) const;
  static LatticeSet load(const std::filesystem::path& path);

 private:
  GridCube window_;
  std::vector<std::uint8_t> member_;
};

// Nested scales L_0 >= L_1 >= ... >= L_J with integer ratios,
// L_{j+1} <= (1/4) eps^2 L_j, and L_J divisible by q_base.
struct ScaleSequence {
  double eps = 0;
  std::int64_t q_base = 1;
  std::vector<std::int64_t> scales;

  ScaleSequence(double eps_, std::int64_t q_base_, std::vector<std::int64_t> scales_);
  std::size_t levels() const { return scales.size() - 1; }  // J
};

// Exact integer test of m_i . m_j == lambda2 * t_ij for all pairs.
bool isometry_check(const SimplexSpec& spec, std::span<const Point> candidate,
                    std::int64_t lambda2);

// All tuples (m_2..m_k) with every m_i in (qZ)^n intersect [-B,B]^n matching
// the Gram constraints, in lexicographic order (m_2 major, coordinates
// ascending). B must be at least lambda * max |v_i| so nothing is clipped.
std::vector<std::vector<Point>> enumerate_copies(const SimplexSpec& spec,
                                                 std::int64_t lambda2,
                                                 std::int64_t q, std::int64_t B);
std::uint64_t count_copies(const SimplexSpec& spec, std::int64_t lambda2,
                           std::int64_t q, std::int64_t B);
// Box brute force over ((qZ)^n intersect [-B,B]^n)^{k-1}; the oracle
// enumerate_copies is tested against.
std::vector<std::vector<Point>> enumerate_copies_naive(const SimplexSpec& spec,
                                                       std::int64_t lambda2,
                                                       std::int64_t q,
                                                       std::int64_t B);

struct ScanRow {
  std::int64_t lambda2;
  std::uint64_t raw;
  double normalized;  // raw / (lambda/q)^{(n-k)(k-1)}
};
// One row per lambda2 in [lo, hi] that admits copies of the right parity;
// rows with raw == 0 are kept (normalized 0).
std::vector<ScanRow> count_asymptotic_scan(const SimplexSpec& spec, std::int64_t q,
                                           std::int64_t lambda2_lo,
                                           std::int64_t lambda2_hi);

struct SigmaMeasure {
  std::vector<std::vector<Point>> copies;
  double weight;      // 1/raw, so the weights sum to 1 exactly
  std::uint64_t raw;
};
// Throws std::domain_error when the copy set is empty.
SigmaMeasure sigma_normalized(const SimplexSpec& spec, std::int64_t q,
                              std::int64_t lambda2);

struct FormValue {
  double value;
  double boundary_deficit;  // 1 - (the same form on all-ones inputs)
};

// N^1: E_{m1 in Q} sum over copies of f_1(m1) prod_i f_i(m1 + c_i) with the
// normalized copy measure; positivity with indicator inputs certifies an
// isometric copy inside the set.
FormValue eval_N1_lattice(const SimplexSpec& spec, std::int64_t q,
                          std::int64_t lambda2, const GridCube& window,
                          std::span<const std::vector<double>> f);

// M^1: E_t prod_i (f_i * chi_{q,lambda})(t) with chi the normalized
// indicator of the cube grid Q(q,lambda).
FormValue eval_M1_lattice(std::int64_t q, std::int64_t lambda2,
                          const GridCube& window,
                          std::span<const std::vector<double>> f);

// ||f||_{U^1_{q,L}} = sqrt(E_t |f * chi_{q,L}(t)|^2), q | L, L <= side.
double u1_norm(std::span<const double> f, const GridCube& window,
               std::int64_t q, std::int64_t L);

// Conditional expectation on the grid sigma-algebra G_{q,L}: atoms are the
// residue classes mod q inside each L-sided cell. Requires q | L, L | side.
std::vector<double> grid_cond_exp(std::span<const double> f,
                                  const GridCube& window, std::int64_t q,
                                  std::int64_t L);

struct KvnResult {
  std::uint32_t level;             // first j with the residual U^1 <= eps
  std::vector<double> cond_table;  // E(f | G_{q_j, L_j})
  std::vector<double> u1_trace;     // residual U^1 per scanned level
  std::vector<double> energy_trace; // ||E(f|G_j)||_2^2 per scanned level
};

// Scans levels j = 1.. with moduli q_j = q0 * q1^j until
// ||f - E(f|G_{q_j,L_j,Q})||_{U^1_{q_{j+1},L_{j+1}}} <= eps. The sequence
// must carry at least ceil(guarantee_C * eps^-2) levels (the energy-increment
// level bound); shorter sequences are rejected up front.
KvnResult kvn_grid_decompose(std::span<const double> f, const GridCube& window,
                             const ScaleSequence& scales, std::int64_t q0,
                             std::int64_t q1, double eps,
                             double guarantee_C = 0.12);

// lcm{1 <= q <= C * eps^-10} as an exact big integer; ranges longer than
// desk_cap raise a desk-scale cap error rather than truncating.
BigInt q_epsilon(double eps, double C, std::uint64_t desk_cap = 200000);

struct UniformityReport {
  double overall;
  double max_relative;
  Point worst_residue;
  bool is_uniform;  // max_relative <= (1 + eps^2) * overall
};
// Densities on the finite window (the window stands in for the Banach
// limsup); window side must be divisible by qstar.
UniformityReport uniformity_test(const LatticeSet& set, double eps,
                                 std::int64_t qstar);

struct IncrementStep {
  Point shift;
  std::int64_t modulus;
  double density_before;
  double density_after;
};

struct IncrementResult {
  LatticeSet final_set;
  std::uint32_t steps;
  std::vector<IncrementStep> history;
  std::string status;  // "uniform" or "window exhausted"
};

// While not eps-uniform: restrict to the worst residue class and rescale
// m -> (m - s)/qstar, multiplying the density by at least (1 + eps^2).
IncrementResult density_increment(const LatticeSet& set, double eps,
                                  std::int64_t qstar);

}  // namespace confcount::lat
