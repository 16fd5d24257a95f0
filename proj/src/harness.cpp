#include "confcount/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "confcount/dft.hpp"
#include "confcount/forms.hpp"
#include "confcount/kernels.hpp"
#include "confcount/regularity.hpp"

namespace confcount::harness {

const char* kind_name(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::FfCount: return "ff_count";
    case ScenarioKind::FfRegularize: return "ff_regularize";
    case ScenarioKind::FfDecay: return "ff_decay";
    case ScenarioKind::LatticeCount: return "lattice_count";
    case ScenarioKind::LatticeScan: return "lattice_scan";
    case ScenarioKind::Uniformity: return "uniformity";
    case ScenarioKind::Increment: return "increment";
  }
  return "unknown";
}

ScenarioKind parse_kind(const std::string& name) {
  for (auto k : {ScenarioKind::FfCount, ScenarioKind::FfRegularize,
                 ScenarioKind::FfDecay, ScenarioKind::LatticeCount,
                 ScenarioKind::LatticeScan, ScenarioKind::Uniformity,
                 ScenarioKind::Increment})
    if (name == kind_name(k)) return k;
  throw ConfigError("kind", "unknown scenario kind '" + name + "'");
}

Scenario parse_scenario_text(const std::string& text) {
  Scenario s;
  bool have_kind = false, have_output = false;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(line.substr(first), "expected 'key = value'", lineno);
    auto trim = [](std::string v) {
      const auto b = v.find_first_not_of(" \t\r");
      const auto e = v.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string{} : v.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(key, "empty key", lineno);
    if (key == "kind") {
      s.kind = parse_kind(value);
      have_kind = true;
    } else if (key == "seed") {
      try {
        s.seed = std::stoull(value);
      } catch (const std::exception&) {
        throw ConfigError("seed", "not an unsigned integer: " + value, lineno);
      }
    } else if (key == "output") {
      s.output = value;
      have_output = true;
    } else {
      s.params[key] = value;
    }
  }
  if (!have_kind) throw ConfigError("kind", "missing required key");
  if (!have_output) throw ConfigError("output", "missing required key");
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("output", "cannot open scenario file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario_text(ss.str());
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const std::string& require(const Scenario& s, const std::string& key) {
  auto it = s.params.find(key);
  if (it == s.params.end()) throw ConfigError(key, "missing required parameter");
  return it->second;
}

std::string get_str(const Scenario& s, const std::string& key, const std::string& dflt) {
  auto it = s.params.find(key);
  return it == s.params.end() ? dflt : it->second;
}

std::int64_t get_int(const Scenario& s, const std::string& key, std::int64_t dflt,
                     bool required = false) {
  auto it = s.params.find(key);
  if (it == s.params.end()) {
    if (required) throw ConfigError(key, "missing required parameter");
    return dflt;
  }
  try {
    return std::stoll(it->second);
  } catch (const std::exception&) {
    throw ConfigError(key, "not an integer: " + it->second);
  }
}

double get_double(const Scenario& s, const std::string& key, double dflt,
                  bool required = false) {
  auto it = s.params.find(key);
  if (it == s.params.end()) {
    if (required) throw ConfigError(key, "missing required parameter");
    return dflt;
  }
  try {
    return std::stod(it->second);
  } catch (const std::exception&) {
    throw ConfigError(key, "not a number: " + it->second);
  }
}

bool get_bool(const Scenario& s, const std::string& key, bool dflt) {
  auto it = s.params.find(key);
  if (it == s.params.end()) return dflt;
  if (it->second == "true" || it->second == "1") return true;
  if (it->second == "false" || it->second == "0") return false;
  throw ConfigError(key, "expected true/false: " + it->second);
}

std::vector<std::int64_t> parse_int_list(const std::string& field,
                                         const std::string& value) {
  std::vector<std::int64_t> out;
  std::istringstream in(value);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      out.push_back(std::stoll(item));
    } catch (const std::exception&) {
      throw ConfigError(field, "not an integer list: " + value);
    }
  }
  if (out.empty()) throw ConfigError(field, "empty list");
  return out;
}

void atomic_write(const std::filesystem::path& path, const std::string& content) {
  const auto parent = path.parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + tmp);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

lat::SimplexSpec resolve_spec(const std::string& value) {
  auto builtin = [](const std::string& name, std::uint32_t n,
                    std::uint32_t points) {
    std::vector<lat::Point> pts(points, lat::Point(n, 0));
    for (std::uint32_t i = 1; i < points; ++i) pts[i][i - 1] = 1;
    (void)name;
    return lat::SimplexSpec(n, std::move(pts));
  };
  if (value.rfind("segment:", 0) == 0)
    return builtin(value, static_cast<std::uint32_t>(std::stoul(value.substr(8))), 2);
  if (value.rfind("right-triangle:", 0) == 0)
    return builtin(value, static_cast<std::uint32_t>(std::stoul(value.substr(15))), 3);
  return lat::SimplexSpec::load(value);
}

std::pair<std::int64_t, std::int64_t> parse_range(const std::string& field,
                                                  const std::string& value) {
  const auto colon = value.find(':');
  if (colon == std::string::npos)
    throw ConfigError(field, "expected 'lo:hi': " + value);
  try {
    return {std::stoll(value.substr(0, colon)), std::stoll(value.substr(colon + 1))};
  } catch (const std::exception&) {
    throw ConfigError(field, "expected 'lo:hi': " + value);
  }
}

// --- scenario bodies; each returns the artifact text -------------------------

std::string run_ff_count(const Scenario& s) {
  const auto q = static_cast<std::uint32_t>(get_int(s, "q", 5));
  const auto d = static_cast<std::uint32_t>(get_int(s, "d", 2));
  const double density = get_double(s, "density", 0.5);
  const auto trials = static_cast<std::uint32_t>(get_int(s, "trials", 1));
  const bool allow_large = get_bool(s, "allow_large", false);
  if (d < 1 || d > 2) throw ConfigError("d", "supported block counts are 1 and 2");
  if (q > 17 && !allow_large)
    throw ConfigError("q", "q > 17 needs allow_large = true (q^8-scale sums)");
  if (!(density >= 0.0 && density <= 1.0))
    throw ConfigError("density", "density must lie in [0,1]");
  ff::PrimeField field(q);

  std::vector<std::vector<std::uint32_t>> t_combos;
  if (s.params.count("t") != 0) {
    const auto list = parse_int_list("t", s.params.at("t"));
    if (list.size() != d) throw ConfigError("t", "need one t per block");
    std::vector<std::uint32_t> combo;
    for (auto v : list) {
      if (v < 1 || v >= q) throw ConfigError("t", "t_j must satisfy 1 <= t_j <= q-1");
      combo.push_back(static_cast<std::uint32_t>(v));
    }
    t_combos.push_back(std::move(combo));
  } else {
    std::vector<std::uint32_t> combo(d, 1);
    for (;;) {
      t_combos.push_back(combo);
      std::uint32_t i = 0;
      while (i < d && ++combo[i] == q) combo[i++] = 1;
      if (i == d) break;
    }
  }

  Rng rng(s.seed);
  std::ostringstream out;
  out << "# confcount csv v1 kind=ff_count\n";
  out << "q,d,t,density,N,M,gap,lower_bound,box_min\n";
  for (std::uint32_t trial = 0; trial < trials; ++trial) {
    const auto indicator = random_indicator(field, 2 * d, density, rng);
    const double box_min = forms::box_norm(indicator, d);
    const double measured_density = indicator.mean();
    for (const auto& combo : t_combos) {
      forms::ConfigurationSpace space(field, d, combo);
      const auto gap = forms::counting_gap(space, indicator);
      out << q << ',' << d << ',';
      for (std::size_t j = 0; j < combo.size(); ++j)
        out << (j > 0 ? ";" : "") << combo[j];
      out << ',' << fmt(measured_density) << ',' << fmt(gap.n) << ',' << fmt(gap.m)
          << ',' << fmt(gap.gap) << ',' << fmt(gap.lower_bound) << ','
          << fmt(box_min) << '\n';
    }
  }
  return out.str();
}

std::string run_ff_regularize(const Scenario& s) {
  const auto q = static_cast<std::uint32_t>(get_int(s, "q", 5));
  const auto d = static_cast<std::uint32_t>(get_int(s, "d", 2));
  const auto k = static_cast<std::uint32_t>(get_int(s, "k", 2));
  const double eps = get_double(s, "eps", 0.25, true);
  if (k > d) throw ConfigError("k", "need k <= d");
  ff::PrimeField field(q);
  Rng rng(s.seed);

  forms::EdgeFunctionFamily fam(field, d, k);
  for (std::size_t i = 0; i < fam.edge_count(); ++i)
    fam.set(i, random_signs(field, 2 * k, rng));
  const auto res = reg::weak_regularize(fam, eps);

  nlohmann::json j;
  j["iterations"] = res.iterations;
  nlohmann::json boxes = nlohmann::json::object();
  for (std::size_t i = 0; i < fam.edge_count(); ++i)
    boxes[hg::to_string(fam.edge(i), d)] = res.final_box_norms[i];
  j["final_box_norms"] = boxes;
  nlohmann::json cpx = nlohmann::json::object();
  for (std::size_t i = 0; i < res.system.part_count(); ++i) {
    std::string name = "[";
    const auto& be = res.system.boundary_edge(i);
    for (std::size_t b = 0; b < be.blocks.size(); ++b)
      name += (b > 0 ? "," : "") + std::to_string(be.blocks[b]);
    name += "]";
    cpx[name] = res.system.part(i).generator_count();
  }
  j["complexities"] = cpx;
  j["energy_trace"] = res.energy_trace;
  return j.dump(2) + "\n";
}

std::string run_ff_decay(const Scenario& s) {
  const auto qmin = static_cast<std::uint32_t>(get_int(s, "qmin", 3));
  const auto qmax = static_cast<std::uint32_t>(get_int(s, "qmax", 101));
  if (qmax > 4096) throw ConfigError("qmax", "decay sweep cap is q <= 4096");
  std::ostringstream out;
  out << "# confcount csv v1 kind=ff_decay\n";
  out << "q,t,mean_dev,max_decay_const\n";
  for (std::uint32_t q = qmin; q <= qmax; ++q) {
    if (!ff::is_prime(q) || q < 3) continue;
    ff::PrimeField field(q);
    for (std::uint32_t t = 1; t < q; ++t) {
      const auto decay = ff::sphere_decay(field, t);
      out << q << ',' << t << ',' << fmt(decay.mean_deviation) << ','
          << fmt(decay.max_decay_const) << '\n';
    }
  }
  return out.str();
}

std::string run_lattice_count(const Scenario& s) {
  const auto spec = resolve_spec(require(s, "spec"));
  const auto q = get_int(s, "q", 1);
  const auto range = parse_range("lambda2_range", require(s, "lambda2_range"));
  if (range.second - range.first > 4096)
    throw ConfigError("lambda2_range", "range cap is 4096 values");
  std::ostringstream out;
  out << "# confcount csv v1 kind=lattice_count\n";
  out << "lambda2,count\n";
  for (std::int64_t l2 = range.first; l2 <= range.second; ++l2) {
    std::int64_t b = 0;
    while (b * b < l2 * spec.max_t()) ++b;
    out << l2 << ',' << lat::count_copies(spec, l2, q, b) << '\n';
  }
  return out.str();
}

std::string run_lattice_scan(const Scenario& s) {
  const auto spec = resolve_spec(require(s, "spec"));
  const auto q = get_int(s, "q", 1);
  const auto range = parse_range("lambda2_range", require(s, "lambda2_range"));
  if (range.second - range.first > 4096)
    throw ConfigError("lambda2_range", "range cap is 4096 values");
  const auto rows = lat::count_asymptotic_scan(spec, q, range.first, range.second);

  // empirical rho estimate: median of the nonzero normalized column
  std::vector<double> nz;
  for (const auto& r : rows)
    if (r.raw > 0) nz.push_back(r.normalized);
  double rho = 0.0;
  if (!nz.empty()) {
    std::sort(nz.begin(), nz.end());
    rho = nz[nz.size() / 2];
  }
  double lo = 0.0, hi = 0.0;
  if (!nz.empty()) {
    lo = nz.front();
    hi = nz.back();
  }
  // decay exponent of |normalized/rho - 1| against lambda, least squares in
  // log-log; reported, never asserted
  double slope = 0.0;
  {
    std::vector<double> xs, ys;
    for (const auto& r : rows) {
      if (r.raw == 0 || rho <= 0.0) continue;
      const double dev = std::fabs(r.normalized / rho - 1.0);
      if (dev <= 0.0) continue;
      xs.push_back(0.5 * std::log(static_cast<double>(r.lambda2)));
      ys.push_back(std::log(dev));
    }
    if (xs.size() >= 2) {
      const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
      const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
      double num = 0.0, den = 0.0;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        num += (xs[i] - mx) * (ys[i] - my);
        den += (xs[i] - mx) * (xs[i] - mx);
      }
      if (den > 0.0) slope = num / den;
    }
  }

  std::ostringstream out;
  out << "# confcount csv v1 kind=lattice_scan\n";
  out << "# rho_median=" << fmt(rho) << " normalized_min=" << fmt(lo)
      << " normalized_max=" << fmt(hi)
      << " max_min_ratio=" << fmt(lo > 0.0 ? hi / lo : 0.0)
      << " empirical_decay_exponent=" << fmt(slope) << '\n';
  out << "lambda2,raw,normalized,deviation\n";
  for (const auto& r : rows) {
    const double dev = rho > 0.0 ? std::fabs(r.normalized / rho - 1.0) : 0.0;
    out << r.lambda2 << ',' << r.raw << ',' << fmt(r.normalized) << ','
        << fmt(dev) << '\n';
  }
  return out.str();
}

lat::LatticeSet resolve_set(const Scenario& s, Rng& rng) {
  const auto n = static_cast<std::uint32_t>(get_int(s, "window_n", 1));
  const auto side = get_int(s, "window_side", 7200);
  lat::GridCube window(n, lat::Point(n, 0), side);
  if (s.params.count("set") != 0) return lat::LatticeSet::load(s.params.at("set"));
  const std::string gen = get_str(s, "gen", "random:0.5");
  if (gen.rfind("random:", 0) == 0)
    return random_lattice_set(window, std::stod(gen.substr(7)), rng);
  if (gen.rfind("congruence:", 0) == 0) {
    // congruence:<q*>:<r0,r1,...>
    const auto rest = gen.substr(11);
    const auto colon = rest.find(':');
    if (colon == std::string::npos)
      throw ConfigError("gen", "expected congruence:<q*>:<r,...>");
    const std::int64_t qstar = std::stoll(rest.substr(0, colon));
    const auto residues = parse_int_list("gen", rest.substr(colon + 1));
    if (residues.size() != n) throw ConfigError("gen", "need one residue per axis");
    return congruence_class_set(window, qstar, residues);
  }
  if (gen.rfind("concentrated:", 0) == 0) {
    // concentrated:<q*>:<r,...>:<density>:<fraction>
    std::vector<std::string> parts;
    std::istringstream in(gen.substr(13));
    std::string item;
    while (std::getline(in, item, ':')) parts.push_back(item);
    if (parts.size() != 4)
      throw ConfigError("gen", "expected concentrated:<q*>:<r,...>:<density>:<frac>");
    const std::int64_t qstar = std::stoll(parts[0]);
    const auto residues = parse_int_list("gen", parts[1]);
    if (residues.size() != n) throw ConfigError("gen", "need one residue per axis");
    return concentrated_set(window, qstar, residues, std::stod(parts[2]),
                            std::stod(parts[3]), rng);
  }
  if (gen.rfind("two_scale:", 0) == 0) {
    if (n != 1) throw ConfigError("gen", "two_scale sets are one-dimensional");
    return two_scale_set(window, std::stoll(gen.substr(10)));
  }
  throw ConfigError("gen", "unknown generator '" + gen + "'");
}

std::string run_uniformity(const Scenario& s) {
  Rng rng(s.seed);
  const auto set = resolve_set(s, rng);
  const auto qstar = get_int(s, "qstar", 60);
  const double eps = get_double(s, "eps", 0.1, true);
  const auto rep = lat::uniformity_test(set, eps, qstar);
  nlohmann::json j;
  j["window_n"] = set.window().n;
  j["window_side"] = set.window().side;
  j["qstar"] = qstar;
  j["eps"] = eps;
  j["overall_density"] = rep.overall;
  j["max_relative_density"] = rep.max_relative;
  j["worst_residue"] = rep.worst_residue;
  j["is_uniform"] = rep.is_uniform;
  return j.dump(2) + "\n";
}

std::string run_increment(const Scenario& s) {
  Rng rng(s.seed);
  const auto set = resolve_set(s, rng);
  const auto qstar = get_int(s, "qstar", 60);
  const double eps = get_double(s, "eps", 0.1, true);
  const auto res = lat::density_increment(set, eps, qstar);
  nlohmann::json j;
  j["window_n"] = set.window().n;
  j["window_side"] = set.window().side;
  j["qstar"] = qstar;
  j["eps"] = eps;
  j["initial_density"] = set.density();
  j["steps"] = res.steps;
  j["status"] = res.status;
  j["final_density"] = res.final_set.density();
  j["final_side"] = res.final_set.window().side;
  nlohmann::json hist = nlohmann::json::array();
  for (const auto& h : res.history) {
    nlohmann::json e;
    e["shift"] = h.shift;
    e["modulus"] = h.modulus;
    e["density_before"] = h.density_before;
    e["density_after"] = h.density_after;
    hist.push_back(e);
  }
  j["history"] = hist;
  return j.dump(2) + "\n";
}

}  // namespace

void run(const Scenario& scenario) {
  const auto start = std::chrono::steady_clock::now();
  std::string artifact;
  try {
    switch (scenario.kind) {
      case ScenarioKind::FfCount: artifact = run_ff_count(scenario); break;
      case ScenarioKind::FfRegularize: artifact = run_ff_regularize(scenario); break;
      case ScenarioKind::FfDecay: artifact = run_ff_decay(scenario); break;
      case ScenarioKind::LatticeCount: artifact = run_lattice_count(scenario); break;
      case ScenarioKind::LatticeScan: artifact = run_lattice_scan(scenario); break;
      case ScenarioKind::Uniformity: artifact = run_uniformity(scenario); break;
      case ScenarioKind::Increment: artifact = run_increment(scenario); break;
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    // precondition violations triggered by parameter values are
    // configuration errors, not runtime failures
    throw ConfigError("params", e.what());
  }
  atomic_write(scenario.output, artifact);

  const auto wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - start)
                           .count();
  nlohmann::json manifest;
  manifest["tool"] = "confcount";
  manifest["version"] = kToolVersion;
  manifest["rng_algorithm"] = kRngAlgorithm;
  manifest["kernel_isa"] = kern::isa_name(kern::active_isa());
  manifest["kind"] = kind_name(scenario.kind);
  manifest["seed"] = scenario.seed;
  manifest["params"] = scenario.params;
  manifest["output"] = scenario.output;
  manifest["wall_ms"] = wall_ms;
  atomic_write(scenario.output + ".manifest.json", manifest.dump(2) + "\n");
}

// --- generators --------------------------------------------------------------

namespace {

// exactly `ones` ones over `size` slots, by seeded partial Fisher-Yates
std::vector<std::uint8_t> exact_subset(std::size_t size, std::size_t ones, Rng& rng) {
  std::vector<std::uint32_t> idx(size);
  std::iota(idx.begin(), idx.end(), 0u);
  std::vector<std::uint8_t> out(size, 0);
  for (std::size_t i = 0; i < ones; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(size - i));
    std::swap(idx[i], idx[j]);
    out[idx[i]] = 1;
  }
  return out;
}

}  // namespace

ff::FieldFunction random_indicator(ff::PrimeField field, std::uint32_t m,
                                   double density, Rng& rng) {
  ff::FieldFunction f(field, m);
  const auto ones = static_cast<std::size_t>(
      std::llround(density * static_cast<double>(f.size())));
  const auto bits = exact_subset(f.size(), std::min(ones, f.size()), rng);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = bits[i];
  return f;
}

ff::FieldFunction random_signs(ff::PrimeField field, std::uint32_t m, Rng& rng) {
  ff::FieldFunction f(field, m);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = rng.sign();
  return f;
}

ff::FieldFunction random_bounded(ff::PrimeField field, std::uint32_t m, Rng& rng) {
  ff::FieldFunction f(field, m);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = rng.uniform_pm1();
  return f;
}

ff::FieldFunction planted_product(ff::PrimeField field,
                                  const std::vector<std::uint8_t>& a1,
                                  const std::vector<std::uint8_t>& a2) {
  const std::size_t n = static_cast<std::size_t>(field.q) * field.q;
  if (a1.size() != n || a2.size() != n)
    throw std::invalid_argument("planted_product: factor tables must live on F_q^2");
  ff::FieldFunction f(field, 4);
  for (std::size_t x2 = 0; x2 < n; ++x2)
    for (std::size_t x1 = 0; x1 < n; ++x1)
      f[x1 + n * x2] = (a1[x1] != 0 && a2[x2] != 0) ? 1.0 : 0.0;
  return f;
}

lat::LatticeSet random_lattice_set(const lat::GridCube& window, double density,
                                   Rng& rng) {
  const auto ones = static_cast<std::size_t>(
      std::llround(density * static_cast<double>(window.volume())));
  return lat::LatticeSet(window, exact_subset(window.volume(), ones, rng));
}

lat::LatticeSet congruence_class_set(const lat::GridCube& window,
                                     std::int64_t qstar, const lat::Point& residue) {
  lat::LatticeSet set(window);
  std::vector<std::int64_t> x(window.n, 0);
  for (std::size_t idx = 0; idx < window.volume(); ++idx) {
    bool in = true;
    for (std::uint32_t a = 0; a < window.n && in; ++a) {
      const std::int64_t abs_coord = window.corner[a] + x[a];
      in = ((abs_coord % qstar) + qstar) % qstar == residue[a];
    }
    set.set(idx, in);
    std::uint32_t a = 0;
    while (a < window.n && ++x[a] == window.side) x[a++] = 0;
  }
  return set;
}

lat::LatticeSet concentrated_set(const lat::GridCube& window, std::int64_t qstar,
                                 const lat::Point& residue, double density,
                                 double in_class, Rng& rng) {
  const std::size_t volume = window.volume();
  const auto members = static_cast<std::size_t>(
      std::llround(density * static_cast<double>(volume)));
  const auto inside = static_cast<std::size_t>(
      std::llround(in_class * static_cast<double>(members)));

  std::vector<std::size_t> class_idx, other_idx;
  std::vector<std::int64_t> x(window.n, 0);
  for (std::size_t idx = 0; idx < volume; ++idx) {
    bool in = true;
    for (std::uint32_t a = 0; a < window.n && in; ++a) {
      const std::int64_t abs_coord = window.corner[a] + x[a];
      in = ((abs_coord % qstar) + qstar) % qstar == residue[a];
    }
    (in ? class_idx : other_idx).push_back(idx);
    std::uint32_t a = 0;
    while (a < window.n && ++x[a] == window.side) x[a++] = 0;
  }
  if (inside > class_idx.size() || members - inside > other_idx.size())
    throw std::invalid_argument("concentrated_set: requested counts exceed class sizes");

  lat::LatticeSet set(window);
  const auto pick_class = exact_subset(class_idx.size(), inside, rng);
  for (std::size_t i = 0; i < class_idx.size(); ++i)
    if (pick_class[i] != 0) set.set(class_idx[i], true);
  const auto pick_other = exact_subset(other_idx.size(), members - inside, rng);
  for (std::size_t i = 0; i < other_idx.size(); ++i)
    if (pick_other[i] != 0) set.set(other_idx[i], true);
  return set;
}

lat::LatticeSet two_scale_set(const lat::GridCube& window, std::int64_t block) {
  if (window.n != 1)
    throw std::invalid_argument("two_scale_set: the window must be one-dimensional");
  if (block < 1 || window.side % block != 0)
    throw std::invalid_argument("two_scale_set: block must divide the side");
  lat::LatticeSet set(window);
  for (std::size_t idx = 0; idx < window.volume(); ++idx)
    set.set(idx, (static_cast<std::int64_t>(idx) / block) % 2 == 0);
  return set;
}

bool AcceptanceReport::all_pass() const {
  for (const auto& l : lines)
    if (!l.pass) return false;
  return true;
}

void print_report(const AcceptanceReport& report, std::ostream& out) {
  for (const auto& l : report.lines) {
    out << (l.pass ? "[PASS] " : "[FAIL] ") << l.name << ": measured "
        << fmt(l.measured) << " vs threshold " << fmt(l.threshold);
    if (!l.detail.empty()) out << " (" << l.detail << ")";
    out << '\n';
  }
  out << (report.all_pass() ? "ACCEPTANCE: all criteria passed\n"
                            : "ACCEPTANCE: criteria FAILED\n");
}

}  // namespace confcount::harness
