#pragma once

// Experiment orchestration: declarative scenarios, deterministic set
// generators, CSV/JSON emission and the acceptance-suite runner. A scenario
// is a flat key = value file; identical scenario bytes produce byte-identical
// artifact files (the side manifest additionally records versions, the RNG
// algorithm id, the active kernel ISA and wall time).

#include <cstdint>
#include <filesystem>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "confcount/field.hpp"
#include "confcount/lattice.hpp"
#include "confcount/rng.hpp"

namespace confcount::harness {

inline constexpr const char* kToolVersion = "1.0.0";

// Invalid configuration: carries the offending field (and line when parsed
// from a file). Maps to exit code 2.
struct ConfigError : std::runtime_error {
  ConfigError(std::string field_, std::string msg, int line_ = 0)
      : std::runtime_error(line_ > 0
                               ? "line " + std::to_string(line_) + ", field '" + field_ + "': " + msg
                               : "field '" + field_ + "': " + msg),
        field(std::move(field_)),
        line(line_) {}
  std::string field;
  int line;
};

enum class ScenarioKind {
  FfCount,
  FfRegularize,
  FfDecay,
  LatticeCount,
  LatticeScan,
  Uniformity,
  Increment,
};

const char* kind_name(ScenarioKind k);
ScenarioKind parse_kind(const std::string& name);

struct Scenario {
  ScenarioKind kind = ScenarioKind::FfCount;
  std::map<std::string, std::string> params;
  std::uint64_t seed = 0;
  std::string output;
};

Scenario parse_scenario_text(const std::string& text);
Scenario load_scenario(const std::filesystem::path& path);

// Executes the scenario, writing the artifact atomically plus a
// "<output>.manifest.json" run manifest. Throws ConfigError on bad
// parameters or exceeded resource caps.
void run(const Scenario& scenario);

// --- deterministic generators ---------------------------------------------

// exactly round(density * q^m) ones, placed by a seeded partial shuffle
ff::FieldFunction random_indicator(ff::PrimeField field, std::uint32_t m,
                                   double density, Rng& rng);
// values exactly +-1
ff::FieldFunction random_signs(ff::PrimeField field, std::uint32_t m, Rng& rng);
// values uniform in [-1,1]
ff::FieldFunction random_bounded(ff::PrimeField field, std::uint32_t m, Rng& rng);
// indicator of A1 x A2 on F_q^4 for A1, A2 subsets of F_q^2
ff::FieldFunction planted_product(ff::PrimeField field,
                                  const std::vector<std::uint8_t>& a1,
                                  const std::vector<std::uint8_t>& a2);

lat::LatticeSet random_lattice_set(const lat::GridCube& window, double density,
                                   Rng& rng);
lat::LatticeSet congruence_class_set(const lat::GridCube& window,
                                     std::int64_t qstar, const lat::Point& residue);
// fraction in_class of the members land in the given residue class mod qstar,
// the rest are spread over the other classes
lat::LatticeSet concentrated_set(const lat::GridCube& window, std::int64_t qstar,
                                 const lat::Point& residue, double density,
                                 double in_class, Rng& rng);
// n=1 window; membership alternates on consecutive blocks of length block
lat::LatticeSet two_scale_set(const lat::GridCube& window, std::int64_t block);

// --- acceptance suite -------------------------------------------------------

struct AcceptanceLine {
  std::string name;
  bool pass;
  double measured;
  double threshold;
  std::string detail;
};

struct AcceptanceReport {
  std::vector<AcceptanceLine> lines;
  bool all_pass() const;
};

// selector: "ff" (criteria 1-6), "lattice" (7-10), "all"
AcceptanceReport acceptance(const std::string& selector, std::ostream& progress);
void print_report(const AcceptanceReport& report, std::ostream& out);

}  // namespace confcount::harness
