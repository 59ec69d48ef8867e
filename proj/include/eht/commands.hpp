#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "eht/chain.hpp"
#include "eht/config.hpp"
#include "eht/dynamics.hpp"

namespace eht {

// Exit-code contract of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitInternal = 1, kExitConfig = 2, kExitCapacity = 3, kExitInvariant = 4 };

struct AnalysisResult {
    StateSpace space;
    ConsistencyTable consistency;
    ChainParameters params;
    ResistanceGraph graph;
    std::vector<double> potentials;                        // closed form
    std::optional<std::vector<double>> tree_potentials;    // minimum j-trees
    StableSet stable;
    CorollaryReport corollary;
    std::vector<double> epsilon_gaps;                      // per consistent state
    // max |r-hat by shortest paths - source node value| over consistent pairs;
    // empty when the dense resistance matrix is too large.
    std::optional<double> path_resistance_deviation;

    std::vector<bool> stable_mask() const;
};

AnalysisResult analyze(const ExperimentConfig& config);
void write_analysis(const ExperimentConfig& config, const AnalysisResult& analysis, const std::filesystem::path& dir);

// mu^xi(Z*) from the idealized chain.
double stable_mass(const AnalysisResult& analysis, double xi);

struct Replication {
    std::uint64_t seed = 0;
    std::size_t initial_state = 0;
    std::vector<EpochLog> trajectory;
    double occupancy = 0.0;
};

struct SimulationResult {
    double xi = 0.0;
    double stable_mass = 0.0;   // mu^xi(Z*)
    std::uint64_t epoch_length = 0;
    bool epoch_length_capped = false;
    double tolerance = 0.05;
    std::vector<Replication> replications;
    std::size_t agreeing = 0;
    bool majority_agree() const { return 2 * agreeing > replications.size(); }
};

SimulationResult simulate(const ExperimentConfig& config, const AnalysisResult& analysis, unsigned threads);
void write_simulation(const ExperimentConfig& config, const SimulationResult& sim, const std::filesystem::path& dir);

struct Check {
    std::string name;
    bool hard = false;  // hard checks decide the exit code; the rest are warnings
    bool passed = false;
    std::string detail;
    nlohmann::json data;
};

struct VerificationResult {
    std::vector<Check> checks;
    bool hard_failure() const;
    bool warnings() const;
};

VerificationResult verify(const ExperimentConfig& config, const AnalysisResult& analysis, unsigned threads);
void write_verification(const VerificationResult& result, const std::filesystem::path& dir);

struct SweepRow {
    double xi = 0.0;
    double stable_mass = 0.0;
    std::optional<double> occupancy;
    double slope_max_relative_error = 0.0;  // local fit over {xi, xi/10, xi/100}
};

std::vector<SweepRow> sweep(const ExperimentConfig& config, const AnalysisResult& analysis, unsigned threads);
void write_sweep(const std::vector<SweepRow>& rows, const std::filesystem::path& dir);

// Runs fn(k) for k in [0, count) on up to `threads` workers; rethrows the
// first exception after all workers stop.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn);

// Entry point of eht-lab; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace eht
