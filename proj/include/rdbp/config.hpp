#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rdbp/distributions.hpp"
#include "rdbp/engine.hpp"
#include "rdbp/immigration.hpp"

namespace rdbp {

inline constexpr int kSchemaVersion = 1;

/// One broken invariant, addressed by a dotted field path such as
/// "immigration.home.claims.b".
struct Violation {
    std::string path;
    std::string message;
};

/// Analytic view of a population: the claim law and the two means. Either
/// mean may come from a full law or from the "m" / "r" shorthand keys.
struct PopulationSection {
    std::optional<Distribution> claims;
    std::optional<ReproductionLaw> reproduction;
    std::optional<Distribution> resources;
    std::optional<double> m;
    std::optional<double> r;
};

struct SimulationSection {
    std::optional<std::uint64_t> ancestors;
    std::optional<std::uint64_t> replicates;
    std::optional<std::uint64_t> gen_cap;
    std::optional<std::uint64_t> pop_cap;
    std::optional<std::uint64_t> horizon;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::vector<std::uint64_t> ancestor_grid;
};

struct LorenzSection {
    /// "analytic" (the claim law), "empirical" (an empirical claim law as a
    /// piecewise-linear curve), "line-of-equality", "perfect-inequality".
    std::string curve = "analytic";
    std::vector<double> grid;
};

struct ImmigrationSection {
    PopulationSection home;
    PopulationSection immigrant;
    std::optional<double> alpha;
    std::vector<double> alpha_grid;
    double tolerance = kEquilibriumTolerance;
};

struct ScenarioConfig {
    PopulationSection population;
    std::optional<Policy> policy;
    SimulationSection simulation;
    std::vector<double> m_grid;
    LorenzSection lorenz;
    std::optional<ImmigrationSection> immigration;
    /// FNV-1a 64 of the config bytes, hex.
    std::string hash;
};

struct ParsedConfig {
    ScenarioConfig config;
    std::vector<Violation> violations;
    bool unreadable = false;
};

/// Parses a JSON scenario document. Relative CSV paths resolve against base_dir.
/// Never throws on bad content; every problem becomes a Violation.
ParsedConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});

/// Reads and parses a file; an unreadable file yields a single violation at path "".
ParsedConfig load_config(const std::filesystem::path& path);

/// "a:b:n" (n evenly spaced points from a to b) or "x,y,z".
std::vector<double> parse_grid_spec(const std::string& spec);

/// One-column CSV of nonnegative values; a non-numeric first line is a header.
std::vector<double> read_value_csv(const std::filesystem::path& path);

std::string fnv1a_hex(const std::string& bytes);

}  // namespace rdbp
