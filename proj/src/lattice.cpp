#include "confcount/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "confcount/kernels.hpp"

namespace confcount::lat {

namespace {

std::int64_t isqrt64(std::int64_t v) {
  if (v < 0) return -1;
  auto r = static_cast<std::int64_t>(std::sqrt(static_cast<double>(v)));
  while (r > 0 && r * r > v) --r;
  while ((r + 1) * (r + 1) <= v) ++r;
  return r;
}

std::int64_t dot(const Point& a, const Point& b) {
  std::int64_t s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

std::int64_t det_int(std::vector<std::vector<std::int64_t>> m) {
  const std::size_t n = m.size();
  if (n == 0) return 1;
  if (n == 1) return m[0][0];
  std::int64_t d = 0;
  std::int64_t sign = 1;
  for (std::size_t c = 0; c < n; ++c) {
    std::vector<std::vector<std::int64_t>> sub(n - 1, std::vector<std::int64_t>(n - 1));
    for (std::size_t r = 1; r < n; ++r) {
      std::size_t cc = 0;
      for (std::size_t c2 = 0; c2 < n; ++c2) {
        if (c2 == c) continue;
        sub[r - 1][cc++] = m[r][c2];
      }
    }
    d += sign * m[0][c] * det_int(sub);
    sign = -sign;
  }
  return d;
}

}  // namespace

SimplexSpec::SimplexSpec(std::uint32_t n_, std::vector<Point> points_)
    : n(n_), points(std::move(points_)) {
  if (n < 1) throw std::invalid_argument("SimplexSpec: dimension must be >= 1");
  if (points.size() < 2)
    throw std::invalid_argument("SimplexSpec: need at least 2 points");
  for (const auto& p : points)
    if (p.size() != n)
      throw std::invalid_argument("SimplexSpec: point dimension mismatch");
  for (auto c : points[0])
    if (c != 0)
      throw std::invalid_argument("SimplexSpec: the first point must be the origin");
  const std::size_t kk = points.size() - 1;
  gram.assign(kk, std::vector<std::int64_t>(kk));
  for (std::size_t i = 0; i < kk; ++i)
    for (std::size_t j = 0; j < kk; ++j)
      gram[i][j] = dot(points[i + 1], points[j + 1]);
  // non-degeneracy: every leading principal minor of the Gram is positive
  for (std::size_t s = 1; s <= kk; ++s) {
    std::vector<std::vector<std::int64_t>> lead(s, std::vector<std::int64_t>(s));
    for (std::size_t i = 0; i < s; ++i)
      for (std::size_t j = 0; j < s; ++j) lead[i][j] = gram[i][j];
    if (det_int(lead) <= 0)
      throw std::invalid_argument("SimplexSpec: degenerate simplex (Gram not positive definite)");
  }
}

std::int64_t SimplexSpec::max_t() const {
  std::int64_t mx = 0;
  for (std::size_t i = 0; i < gram.size(); ++i) mx = std::max(mx, gram[i][i]);
  return mx;
}

std::string SimplexSpec::to_json() const {
  nlohmann::json j;
  j["n"] = n;
  j["points"] = points;
  return j.dump(2);
}

SimplexSpec SimplexSpec::from_json(const std::string& text) {
  auto j = nlohmann::json::parse(text);
  return SimplexSpec(j.at("n").get<std::uint32_t>(),
                     j.at("points").get<std::vector<Point>>());
}

SimplexSpec SimplexSpec::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

void SimplexSpec::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << to_json() << '\n';
}

GridCube::GridCube(std::uint32_t n_, Point corner_, std::int64_t side_,
                   std::int64_t gap_, std::int64_t scale_)
    : n(n_), corner(std::move(corner_)), side(side_), gap(gap_), scale(scale_) {
  if (n < 1) throw std::invalid_argument("GridCube: dimension must be >= 1");
  if (corner.size() != n) throw std::invalid_argument("GridCube: corner dimension mismatch");
  if (side < 1) throw std::invalid_argument("GridCube: side must be >= 1");
  if (gap < 1 || scale < 1 || scale % gap != 0 || side % scale != 0)
    throw std::invalid_argument("GridCube: need gap | scale | side");
  double vol = 1.0;
  for (std::uint32_t i = 0; i < n; ++i) vol *= static_cast<double>(side);
  if (vol > 1e9) throw std::invalid_argument("GridCube: window volume too large");
}

std::size_t GridCube::volume() const {
  std::size_t v = 1;
  for (std::uint32_t i = 0; i < n; ++i) v *= static_cast<std::size_t>(side);
  return v;
}

std::size_t GridCube::index(const Point& p) const {
  std::size_t idx = 0;
  for (std::uint32_t i = n; i-- > 0;) {
    const std::int64_t x = p[i] - corner[i];
    idx = idx * static_cast<std::size_t>(side) + static_cast<std::size_t>(x);
  }
  return idx;
}

Point GridCube::point(std::size_t index) const {
  Point p(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    p[i] = corner[i] + static_cast<std::int64_t>(index % static_cast<std::size_t>(side));
    index /= static_cast<std::size_t>(side);
  }
  return p;
}

bool GridCube::contains(const Point& p) const {
  for (std::uint32_t i = 0; i < n; ++i)
    if (p[i] < corner[i] || p[i] >= corner[i] + side) return false;
  return true;
}

LatticeSet::LatticeSet(GridCube window, std::vector<std::uint8_t> membership)
    : window_(std::move(window)), member_(std::move(membership)) {
  if (member_.size() != window_.volume())
    throw std::invalid_argument("LatticeSet: membership table size mismatch");
}

LatticeSet::LatticeSet(GridCube window)
    : window_(std::move(window)), member_(window_.volume(), 0) {}

std::size_t LatticeSet::count() const {
  std::size_t c = 0;
  for (auto b : member_) c += b != 0 ? 1 : 0;
  return c;
}

double LatticeSet::density() const {
  return static_cast<double>(count()) / static_cast<double>(member_.size());
}

void LatticeSet::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << "latticeset v1\n";
  out << "n=" << window_.n << " side=" << window_.side << " corner=";
  for (std::uint32_t i = 0; i < window_.n; ++i)
    out << (i > 0 ? "," : "") << window_.corner[i];
  out << '\n';
  std::size_t i = 0, tokens = 0;
  while (i < member_.size()) {
    std::size_t j = i;
    while (j < member_.size() && member_[j] == member_[i]) ++j;
    out << (j - i) << 'x' << static_cast<int>(member_[i] != 0 ? 1 : 0);
    ++tokens;
    out << (tokens % 24 == 0 ? '\n' : ' ');
    i = j;
  }
  out << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

LatticeSet LatticeSet::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string magic;
  std::getline(in, magic);
  if (magic != "latticeset v1")
    throw std::runtime_error("bad lattice set header: " + magic);
  std::string header;
  std::getline(in, header);
  std::uint32_t n = 0;
  std::int64_t side = 0;
  Point corner;
  {
    std::istringstream hs(header);
    std::string tok;
    while (hs >> tok) {
      if (tok.rfind("n=", 0) == 0) n = static_cast<std::uint32_t>(std::stoul(tok.substr(2)));
      else if (tok.rfind("side=", 0) == 0) side = std::stoll(tok.substr(5));
      else if (tok.rfind("corner=", 0) == 0) {
        std::istringstream cs(tok.substr(7));
        std::string c;
        while (std::getline(cs, c, ',')) corner.push_back(std::stoll(c));
      }
    }
  }
  GridCube window(n, corner, side);
  std::vector<std::uint8_t> member;
  member.reserve(window.volume());
  std::string tok;
  while (in >> tok && member.size() < window.volume()) {
    auto x = tok.find('x');
    if (x == std::string::npos) throw std::runtime_error("bad RLE token: " + tok);
    const std::size_t run = std::stoull(tok.substr(0, x));
    const std::uint8_t bit = tok.substr(x + 1) == "1" ? 1 : 0;
    member.insert(member.end(), run, bit);
  }
  if (member.size() != window.volume())
    throw std::runtime_error("RLE table does not match the window volume");
  return LatticeSet(std::move(window), std::move(member));
}

ScaleSequence::ScaleSequence(double eps_, std::int64_t q_base_,
                             std::vector<std::int64_t> scales_)
    : eps(eps_), q_base(q_base_), scales(std::move(scales_)) {
  if (!(eps > 0.0) || eps > 1.0)
    throw std::invalid_argument("ScaleSequence: eps must lie in (0,1]");
  if (q_base < 1) throw std::invalid_argument("ScaleSequence: q_base must be >= 1");
  if (scales.size() < 2)
    throw std::invalid_argument("ScaleSequence: need at least two scales");
  for (std::size_t j = 0; j + 1 < scales.size(); ++j) {
    if (scales[j] < 1 || scales[j + 1] < 1 || scales[j] % scales[j + 1] != 0)
      throw std::invalid_argument("ScaleSequence: ratios must be positive integers");
    if (static_cast<double>(scales[j + 1]) >
        0.25 * eps * eps * static_cast<double>(scales[j]) + 1e-9)
      throw std::invalid_argument("ScaleSequence: L_{j+1} <= eps^2 L_j / 4 violated");
  }
  if (scales.back() % q_base != 0)
    throw std::invalid_argument("ScaleSequence: L_J must be divisible by q_base");
}

bool isometry_check(const SimplexSpec& spec, std::span<const Point> candidate,
                    std::int64_t lambda2) {
  if (candidate.size() != spec.k() - 1)
    throw std::invalid_argument("isometry_check: wrong number of points");
  for (const auto& p : candidate)
    if (p.size() != spec.n)
      throw std::invalid_argument("isometry_check: point dimension mismatch");
  for (std::size_t i = 0; i < candidate.size(); ++i)
    for (std::size_t j = i; j < candidate.size(); ++j)
      if (dot(candidate[i], candidate[j]) != lambda2 * spec.gram[i][j]) return false;
  return true;
}

namespace {

struct CopyEnumerator {
  const SimplexSpec& spec;
  std::int64_t lambda2, q, B;
  std::vector<std::vector<Point>>* out;  // null: counting only
  std::uint64_t count = 0;
  std::vector<Point> current;                        // fixed points so far
  std::vector<std::vector<std::int64_t>> suffix2;    // per fixed point p:
                                                     // suffix2[p][pos] = sum_{c>=pos} current[p][c]^2

  void run() {
    current.clear();
    suffix2.clear();
    next_point();
  }

  void next_point() {
    const std::size_t i = current.size();
    if (i == spec.k() - 1) {
      if (out != nullptr) out->push_back(current);
      ++count;
      return;
    }
    Point m(spec.n, 0);
    std::vector<std::int64_t> residual(i);
    for (std::size_t j = 0; j < i; ++j)
      residual[j] = lambda2 * spec.gram[j][i];
    fill_coord(m, 0, lambda2 * spec.gram[i][i], residual);
  }

  void fill_coord(Point& m, std::uint32_t pos, std::int64_t rem,
                  std::vector<std::int64_t>& residual) {
    if (rem < 0) return;
    if (pos == spec.n) {
      if (rem != 0) return;
      for (auto r : residual)
        if (r != 0) return;
      push(m);
      return;
    }
    // Cauchy-Schwarz prune: the remaining inner product with a fixed point
    // cannot exceed sqrt(rem) * (suffix norm of that point)
    for (std::size_t j = 0; j < residual.size(); ++j) {
      const std::int64_t s2 = suffix2[j][pos];
      if (residual[j] * residual[j] > rem * s2) return;
    }
    const std::int64_t cap = std::min(B, isqrt64(rem));
    const std::int64_t umax = cap / q;
    for (std::int64_t u = -umax; u <= umax; ++u) {
      const std::int64_t x = u * q;
      m[pos] = x;
      for (std::size_t j = 0; j < residual.size(); ++j)
        residual[j] -= x * current[j][pos];
      fill_coord(m, pos + 1, rem - x * x, residual);
      for (std::size_t j = 0; j < residual.size(); ++j)
        residual[j] += x * current[j][pos];
    }
    m[pos] = 0;
  }

  void push(const Point& m) {
    current.push_back(m);
    std::vector<std::int64_t> s2(spec.n + 1, 0);
    for (std::uint32_t pos = spec.n; pos-- > 0;)
      s2[pos] = s2[pos + 1] + m[pos] * m[pos];
    suffix2.push_back(std::move(s2));
    next_point();
    current.pop_back();
    suffix2.pop_back();
  }
};

void validate_enum_args(const SimplexSpec& spec, std::int64_t lambda2,
                        std::int64_t q, std::int64_t B) {
  if (lambda2 < 1) throw std::invalid_argument("enumerate_copies: lambda2 must be >= 1");
  if (q < 1) throw std::invalid_argument("enumerate_copies: q must be >= 1");
  if (B * B < lambda2 * spec.max_t())
    throw std::invalid_argument("enumerate_copies: B too small, copies would be clipped");
}

}  // namespace

std::vector<std::vector<Point>> enumerate_copies(const SimplexSpec& spec,
                                                 std::int64_t lambda2,
                                                 std::int64_t q, std::int64_t B) {
  validate_enum_args(spec, lambda2, q, B);
  std::vector<std::vector<Point>> out;
  CopyEnumerator en{spec, lambda2, q, B, &out, 0, {}, {}};
  en.run();
  return out;
}

std::uint64_t count_copies(const SimplexSpec& spec, std::int64_t lambda2,
                           std::int64_t q, std::int64_t B) {
  validate_enum_args(spec, lambda2, q, B);
  CopyEnumerator en{spec, lambda2, q, B, nullptr, 0, {}, {}};
  en.run();
  return en.count;
}

std::vector<std::vector<Point>> enumerate_copies_naive(const SimplexSpec& spec,
                                                       std::int64_t lambda2,
                                                       std::int64_t q,
                                                       std::int64_t B) {
  validate_enum_args(spec, lambda2, q, B);
  const std::int64_t umax = B / q;
  const std::size_t k1 = spec.k() - 1;
  std::vector<std::vector<Point>> out;
  std::vector<Point> tuple(k1, Point(spec.n, -umax * q));

  // odometer over all coordinates of all points
  const std::size_t digits = k1 * spec.n;
  for (;;) {
    bool ok = true;
    for (std::size_t i = 0; i < k1 && ok; ++i)
      for (std::size_t j = i; j < k1 && ok; ++j)
        if (dot(tuple[i], tuple[j]) != lambda2 * spec.gram[i][j]) ok = false;
    if (ok) out.push_back(tuple);
    std::size_t d = digits;
    while (d-- > 0) {
      auto& c = tuple[d / spec.n][d % spec.n];
      if (c < umax * q) {
        c += q;
        break;
      }
      c = -umax * q;
      if (d == 0) return out;
    }
  }
}

std::vector<ScanRow> count_asymptotic_scan(const SimplexSpec& spec, std::int64_t q,
                                           std::int64_t lambda2_lo,
                                           std::int64_t lambda2_hi) {
  if (spec.n < 2 * spec.k() + 1)
    throw std::invalid_argument("count_asymptotic_scan: need n >= 2k+1");
  std::vector<ScanRow> rows;
  const double expo = static_cast<double>((spec.n - spec.k()) * (spec.k() - 1));
  for (std::int64_t l2 = lambda2_lo; l2 <= lambda2_hi; ++l2) {
    std::int64_t B = isqrt64(l2 * spec.max_t());
    if (B * B < l2 * spec.max_t()) ++B;
    const std::uint64_t raw = count_copies(spec, l2, q, B);
    const double lam = std::sqrt(static_cast<double>(l2));
    const double normalized =
        static_cast<double>(raw) / std::pow(lam / static_cast<double>(q), expo);
    rows.push_back({l2, raw, normalized});
  }
  return rows;
}

SigmaMeasure sigma_normalized(const SimplexSpec& spec, std::int64_t q,
                              std::int64_t lambda2) {
  std::int64_t B = isqrt64(lambda2 * spec.max_t());
  if (B * B < lambda2 * spec.max_t()) ++B;
  auto copies = enumerate_copies(spec, lambda2, q, B);
  if (copies.empty())
    throw std::domain_error("sigma_normalized: no copies at this lambda");
  const auto raw = static_cast<std::uint64_t>(copies.size());
  return {std::move(copies), 1.0 / static_cast<double>(raw), raw};
}

namespace {

// strides of the window table, stride[i] = side^i
std::vector<std::size_t> window_strides(const GridCube& w) {
  std::vector<std::size_t> s(w.n);
  std::size_t cur = 1;
  for (std::uint32_t i = 0; i < w.n; ++i) {
    s[i] = cur;
    cur *= static_cast<std::size_t>(w.side);
  }
  return s;
}

// per-axis sliding box sum with taps at offsets gap*(u0 + j), j = 0..W-1;
// zero extension outside [0, side); output divided by W
void box_filter_axis(const std::vector<double>& in, std::vector<double>& out,
                     const GridCube& w, std::uint32_t axis, std::int64_t gap,
                     std::int64_t W, std::int64_t u0) {
  const std::int64_t side = w.side;
  const auto strides = window_strides(w);
  const std::size_t stride = strides[axis];
  const std::size_t volume = in.size();
  const std::size_t line_block = stride * static_cast<std::size_t>(side);
  const double inv_w = 1.0 / static_cast<double>(W);

  for (std::size_t blk = 0; blk < volume; blk += line_block) {
    for (std::size_t base = blk; base < blk + stride; ++base) {
      for (std::int64_t r = 0; r < gap && r < side; ++r) {
        // positions p = r, r+gap, ... along the axis
        double s = 0.0;
        const std::int64_t lo0 = r + gap * u0;
        for (std::int64_t j = 0; j < W; ++j) {
          const std::int64_t t = lo0 + gap * j;
          if (t >= 0 && t < side) s += in[base + static_cast<std::size_t>(t) * stride];
        }
        for (std::int64_t p = r; p < side; p += gap) {
          out[base + static_cast<std::size_t>(p) * stride] = s * inv_w;
          const std::int64_t drop = p + gap * u0;
          const std::int64_t take = p + gap * (u0 + W);
          if (drop >= 0 && drop < side) s -= in[base + static_cast<std::size_t>(drop) * stride];
          if (take >= 0 && take < side) s += in[base + static_cast<std::size_t>(take) * stride];
        }
      }
    }
  }
}

// f * chiform: taps per axis W at offsets gap*(u0..u0+W-1), u0 = -(W/2)
std::vector<double> box_filter(std::span<const double> f, const GridCube& w,
                               std::int64_t gap, std::int64_t W) {
  if (W < 1) throw std::invalid_argument("box_filter: empty tap window");
  std::vector<double> cur(f.begin(), f.end());
  std::vector<double> next(cur.size());
  const std::int64_t u0 = -(W / 2);
  for (std::uint32_t axis = 0; axis < w.n; ++axis) {
    box_filter_axis(cur, next, w, axis, gap, W, u0);
    std::swap(cur, next);
  }
  return cur;
}

std::int64_t lambda_taps(std::int64_t q, std::int64_t lambda2) {
  const double lam = std::sqrt(static_cast<double>(lambda2));
  const auto w = static_cast<std::int64_t>(std::floor(lam / static_cast<double>(q)));
  return std::max<std::int64_t>(1, w);
}

}  // namespace

FormValue eval_N1_lattice(const SimplexSpec& spec, std::int64_t q,
                          std::int64_t lambda2, const GridCube& window,
                          std::span<const std::vector<double>> f) {
  if (window.n != spec.n)
    throw std::invalid_argument("eval_N1_lattice: window dimension mismatch");
  if (f.size() != spec.k())
    throw std::invalid_argument("eval_N1_lattice: need one table per simplex point");
  const std::size_t volume = window.volume();
  for (const auto& t : f)
    if (t.size() != volume)
      throw std::invalid_argument("eval_N1_lattice: table size mismatch");

  const SigmaMeasure sigma = sigma_normalized(spec, q, lambda2);
  const auto strides = window_strides(window);
  const std::size_t k1 = spec.k() - 1;

  // per copy: the linear index shift and the coordinate offsets for bounds
  struct CopyShift {
    std::vector<std::int64_t> coords;      // flattened (point, axis)
    std::vector<std::ptrdiff_t> deltas;    // per point
  };
  std::vector<CopyShift> shifts;
  shifts.reserve(sigma.copies.size());
  for (const auto& copy : sigma.copies) {
    CopyShift cs;
    for (std::size_t i = 0; i < k1; ++i) {
      std::ptrdiff_t delta = 0;
      for (std::uint32_t a = 0; a < window.n; ++a) {
        delta += static_cast<std::ptrdiff_t>(copy[i][a]) *
                 static_cast<std::ptrdiff_t>(strides[a]);
        cs.coords.push_back(copy[i][a]);
      }
      cs.deltas.push_back(delta);
    }
    shifts.push_back(std::move(cs));
  }

  double acc = 0.0, acc_ones = 0.0;
  std::vector<std::int64_t> x(window.n, 0);  // local coordinates of m1
  for (std::size_t idx = 0; idx < volume; ++idx) {
    const double f1 = f[0][idx];
    for (std::size_t c = 0; c < shifts.size(); ++c) {
      const auto& cs = shifts[c];
      bool inside = true;
      for (std::size_t i = 0; i < k1 && inside; ++i)
        for (std::uint32_t a = 0; a < window.n; ++a) {
          const std::int64_t xa = x[a] + cs.coords[i * window.n + a];
          if (xa < 0 || xa >= window.side) {
            inside = false;
            break;
          }
        }
      if (!inside) continue;
      acc_ones += sigma.weight;
      if (f1 == 0.0) continue;
      double term = f1;
      for (std::size_t i = 0; i < k1 && term != 0.0; ++i)
        term *= f[i + 1][static_cast<std::size_t>(
            static_cast<std::ptrdiff_t>(idx) + cs.deltas[i])];
      acc += term * sigma.weight;
    }
    std::uint32_t a = 0;
    while (a < window.n && ++x[a] == window.side) x[a++] = 0;
  }
  const double value = acc / static_cast<double>(volume);
  const double ones = acc_ones / static_cast<double>(volume);
  return {value, 1.0 - ones};
}

FormValue eval_M1_lattice(std::int64_t q, std::int64_t lambda2,
                          const GridCube& window,
                          std::span<const std::vector<double>> f) {
  const std::size_t volume = window.volume();
  for (const auto& t : f)
    if (t.size() != volume)
      throw std::invalid_argument("eval_M1_lattice: table size mismatch");
  if (f.empty()) throw std::invalid_argument("eval_M1_lattice: need at least one table");
  const std::int64_t W = lambda_taps(q, lambda2);

  std::vector<double> prod(volume, 1.0);
  for (const auto& t : f) {
    auto g = box_filter(t, window, q, W);
    kern::mul(prod.data(), prod.data(), g.data(), volume);
  }
  const double value = kern::sum(prod.data(), volume) / static_cast<double>(volume);

  std::vector<double> ones(volume, 1.0);
  auto g1 = box_filter(ones, window, q, W);
  std::vector<double> pow_ones(volume, 1.0);
  for (std::size_t i = 0; i < f.size(); ++i)
    kern::mul(pow_ones.data(), pow_ones.data(), g1.data(), volume);
  const double ones_val = kern::sum(pow_ones.data(), volume) / static_cast<double>(volume);
  return {value, 1.0 - ones_val};
}

double u1_norm(std::span<const double> f, const GridCube& window, std::int64_t q,
               std::int64_t L) {
  if (q < 1 || L < q || L % q != 0 || L > window.side)
    throw std::invalid_argument("u1_norm: need q | L and L <= side");
  if (f.size() != window.volume())
    throw std::invalid_argument("u1_norm: table size mismatch");
  auto g = box_filter(f, window, q, L / q);
  return std::sqrt(kern::dot(g.data(), g.data(), g.size()) /
                   static_cast<double>(g.size()));
}

std::vector<double> grid_cond_exp(std::span<const double> f, const GridCube& window,
                                  std::int64_t q, std::int64_t L) {
  if (q < 1 || L < q || L % q != 0 || window.side % L != 0)
    throw std::invalid_argument("grid_cond_exp: need q | L and L | side");
  if (f.size() != window.volume())
    throw std::invalid_argument("grid_cond_exp: table size mismatch");
  const std::int64_t cells = window.side / L;
  const std::size_t axis_radix = static_cast<std::size_t>(cells * q);
  std::size_t atom_space = 1;
  for (std::uint32_t a = 0; a < window.n; ++a) atom_space *= axis_radix;

  std::vector<double> sum(atom_space, 0.0);
  std::vector<std::size_t> cnt(atom_space, 0);
  // two passes recomputing the atom codes; avoids a per-point code table on
  // large windows
  auto walk = [&](auto&& visit) {
    std::vector<std::int64_t> x(window.n, 0);
    for (std::size_t idx = 0; idx < f.size(); ++idx) {
      std::size_t code = 0;
      for (std::uint32_t a = window.n; a-- > 0;) {
        const std::size_t digit =
            static_cast<std::size_t>((x[a] / L) * q + (x[a] % q));
        code = code * axis_radix + digit;
      }
      visit(idx, code);
      std::uint32_t a = 0;
      while (a < window.n && ++x[a] == window.side) x[a++] = 0;
    }
  };
  walk([&](std::size_t idx, std::size_t code) {
    sum[code] += f[idx];
    cnt[code] += 1;
  });
  std::vector<double> out(f.size());
  walk([&](std::size_t idx, std::size_t code) {
    out[idx] = sum[code] / static_cast<double>(cnt[code]);
  });
  return out;
}

KvnResult kvn_grid_decompose(std::span<const double> f, const GridCube& window,
                             const ScaleSequence& scales, std::int64_t q0,
                             std::int64_t q1, double eps, double guarantee_C) {
  if (f.size() != window.volume())
    throw std::invalid_argument("kvn_grid_decompose: table size mismatch");
  if (q0 < 1 || q1 < 1)
    throw std::invalid_argument("kvn_grid_decompose: moduli must be >= 1");
  for (double v : f)
    if (std::fabs(v) > 1.0 + 1e-12)
      throw std::invalid_argument("kvn_grid_decompose: f must be bounded by 1");
  if (scales.scales[0] != window.side)
    throw std::invalid_argument("kvn_grid_decompose: L_0 must equal the window side");
  if (scales.eps > eps + 1e-12)
    throw std::invalid_argument(
        "kvn_grid_decompose: the sequence is admissible only for a larger eps");
  const std::size_t levels = scales.levels();
  const auto guaranteed =
      static_cast<std::size_t>(std::ceil(guarantee_C / (eps * eps)));
  if (levels < guaranteed)
    throw std::invalid_argument(
        "kvn_grid_decompose: scale sequence shorter than the guaranteed level "
        "bound ceil(C eps^-2) = " + std::to_string(guaranteed));

  KvnResult res{};
  std::int64_t qj = q0;
  for (std::size_t j = 1; j + 1 <= levels; ++j) {
    qj *= q1;  // q_j = q0 * q1^j
    const std::int64_t Lj = scales.scales[j];
    const std::int64_t Lnext = scales.scales[j + 1];
    const std::int64_t qnext = qj * q1;
    if (Lj % qj != 0 || Lnext % qnext != 0)
      throw std::invalid_argument("kvn_grid_decompose: q_j must divide L_j at every level");
    auto cond = grid_cond_exp(f, window, qj, Lj);
    res.energy_trace.push_back(kern::dot(cond.data(), cond.data(), cond.size()) /
                               static_cast<double>(cond.size()));
    std::vector<double> resid(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) resid[i] = f[i] - cond[i];
    const double u1 = u1_norm(resid, window, qnext, Lnext);
    res.u1_trace.push_back(u1);
    if (u1 <= eps) {
      res.level = static_cast<std::uint32_t>(j);
      res.cond_table = std::move(cond);
      return res;
    }
  }
  throw std::runtime_error(
      "kvn_grid_decompose: no level satisfied the residual bound within the "
      "provided sequence");
}

BigInt q_epsilon(double eps, double C, std::uint64_t desk_cap) {
  if (!(eps > 0.0) || eps > 1.0)
    throw std::invalid_argument("q_epsilon: eps must lie in (0,1]");
  if (!(C > 0.0)) throw std::invalid_argument("q_epsilon: C must be positive");
  const double range_d = std::floor(C * std::pow(eps, -10.0));
  if (range_d > static_cast<double>(desk_cap))
    throw std::domain_error(
        "q_epsilon: range C*eps^-10 exceeds the desk-scale cap of " +
        std::to_string(desk_cap));
  const auto range = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(range_d));
  BigInt l = 1;
  for (std::uint64_t v = 2; v <= range; ++v) {
    BigInt b = v;
    l = l / boost::multiprecision::gcd(l, b) * b;
  }
  return l;
}

namespace {

std::size_t residue_code(const Point& corner, const std::vector<std::int64_t>& x,
                         std::int64_t qstar, std::uint32_t n) {
  std::size_t code = 0;
  for (std::uint32_t a = n; a-- > 0;) {
    const std::int64_t abs_coord = corner[a] + x[a];
    const std::int64_t r = ((abs_coord % qstar) + qstar) % qstar;
    code = code * static_cast<std::size_t>(qstar) + static_cast<std::size_t>(r);
  }
  return code;
}

}  // namespace

UniformityReport uniformity_test(const LatticeSet& set, double eps,
                                 std::int64_t qstar) {
  const GridCube& w = set.window();
  if (qstar < 2) throw std::invalid_argument("uniformity_test: qstar must be >= 2");
  if (w.side % qstar != 0)
    throw std::invalid_argument("uniformity_test: window side must be divisible by qstar");
  std::size_t classes = 1;
  for (std::uint32_t a = 0; a < w.n; ++a) classes *= static_cast<std::size_t>(qstar);
  std::vector<std::size_t> cnt(classes, 0);

  std::vector<std::int64_t> x(w.n, 0);
  for (std::size_t idx = 0; idx < set.membership().size(); ++idx) {
    if (set.contains(idx)) cnt[residue_code(w.corner, x, qstar, w.n)] += 1;
    std::uint32_t a = 0;
    while (a < w.n && ++x[a] == w.side) x[a++] = 0;
  }

  const double class_volume =
      static_cast<double>(w.volume()) / static_cast<double>(classes);
  const double overall = set.density();
  std::size_t worst = 0;
  for (std::size_t c = 1; c < classes; ++c)
    if (cnt[c] > cnt[worst]) worst = c;
  const double max_rel = static_cast<double>(cnt[worst]) / class_volume;

  Point wr(w.n);
  std::size_t rest = worst;
  for (std::uint32_t a = 0; a < w.n; ++a) {
    wr[a] = static_cast<std::int64_t>(rest % static_cast<std::size_t>(qstar));
    rest /= static_cast<std::size_t>(qstar);
  }
  return {overall, max_rel, wr, max_rel <= (1.0 + eps * eps) * overall};
}

IncrementResult density_increment(const LatticeSet& set, double eps,
                                  std::int64_t qstar) {
  if (set.count() == 0)
    throw std::invalid_argument("density_increment: the set is empty on its window");
  const double delta0 = set.density();
  const double cap_d = std::ceil(std::log(1.0 / delta0) / std::log1p(eps * eps));
  const auto cap = static_cast<std::uint32_t>(std::max(0.0, cap_d));

  IncrementResult res{set, 0, {}, ""};
  for (;;) {
    const GridCube& w = res.final_set.window();
    if (w.side % qstar != 0 || w.side / qstar < 1) {
      res.status = "window exhausted";
      return res;
    }
    const auto rep = uniformity_test(res.final_set, eps, qstar);
    if (rep.is_uniform) {
      res.status = "uniform";
      return res;
    }
    if (res.steps >= cap)
      throw std::logic_error("density_increment: step bound exceeded");

    // restrict to the worst residue class and rescale m -> (m - s)/qstar
    Point shift(w.n);
    for (std::uint32_t a = 0; a < w.n; ++a) {
      const std::int64_t r = ((w.corner[a] % qstar) + qstar) % qstar;
      std::int64_t off = rep.worst_residue[a] - r;
      off = ((off % qstar) + qstar) % qstar;
      shift[a] = w.corner[a] + off;  // smallest class point >= corner, per axis
    }
    GridCube nw(w.n, Point(w.n, 0), w.side / qstar);
    LatticeSet ns(nw);
    std::vector<std::int64_t> y(w.n, 0);
    for (std::size_t idx = 0; idx < nw.volume(); ++idx) {
      Point orig(w.n);
      for (std::uint32_t a = 0; a < w.n; ++a) orig[a] = shift[a] + y[a] * qstar;
      ns.set(idx, res.final_set.contains(w.index(orig)));
      std::uint32_t a = 0;
      while (a < w.n && ++y[a] == nw.side) y[a++] = 0;
    }
    res.history.push_back({shift, qstar, res.final_set.density(), ns.density()});
    res.final_set = std::move(ns);
    ++res.steps;
  }
}

}  // namespace confcount::lat
