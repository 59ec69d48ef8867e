#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "eht/belief_space.hpp"
#include "eht/dynamics.hpp"
#include "eht/game.hpp"

namespace eht {

// Schema violation located by a JSON pointer into the config document.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string pointer, const std::string& message)
        : std::runtime_error("config error at " + (pointer.empty() ? std::string("/") : pointer) + ": " + message),
          pointer_(std::move(pointer)) {}
    const std::string& pointer() const { return pointer_; }

private:
    std::string pointer_;
};

struct ResamplerSpec {
    std::string kind = "uniform";  // "uniform" or "table"
    double lambda = 0.0;
    // rows[player][from][to]; empty for uniform
    std::vector<std::vector<std::vector<double>>> rows;
    bool operator==(const ResamplerSpec&) const = default;
};

struct RunSpec {
    double xi = 0.05;
    std::vector<double> xi_grid;
    std::vector<double> gamma;
    ResamplerSpec resampler;
    std::uint64_t epochs = 0;
    std::optional<std::uint64_t> epoch_length;
    std::uint64_t max_epoch_length = kDefaultMaxSampleSize;
    std::uint64_t seed = 0;
    std::uint64_t replications = 1;
    std::optional<std::vector<std::size_t>> initial_beliefs;  // belief id per player
    std::optional<double> u_bar;
    bool simulate_in_sweep = false;
    bool operator==(const RunSpec&) const = default;
};

struct ExperimentConfig {
    std::string name;
    std::vector<std::string> players;
    std::vector<std::vector<std::string>> actions;
    // payoffs[profile][player], profiles in lexicographic order of action indices
    std::vector<std::vector<double>> payoffs;
    double sigma = 0.25;
    double tau = 0.2;
    int granularity = 4;
    double epsilon = 0.5;
    DistanceMode distance_mode = DistanceMode::joint_product;
    std::vector<UtilityTransform> transforms;
    RunSpec run;
    std::string output_directory = "out";
    std::vector<std::string> formats{"json", "csv", "ndjson"};

    Game game() const;
    // Run configuration at the given xi (run.xi when omitted).
    RunConfig run_config(std::optional<double> xi = std::nullopt) const;
    // Resamplers checked against the enumerated belief spaces; empty means uniform.
    std::vector<Resampler> resamplers(const StateSpace& space) const;
    // Throws ConfigError(/transforms/i) when a transform is not positive and
    // increasing over the anticipated utilities attained in `space`.
    void validate_transforms(const StateSpace& space) const;
    std::string action_label(std::size_t player, std::size_t action) const { return actions[player][action]; }

    bool operator==(const ExperimentConfig&) const = default;
};

ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const ExperimentConfig& config);

}  // namespace eht
