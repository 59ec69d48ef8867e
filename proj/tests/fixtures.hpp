#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "eht/config.hpp"
#include "eht/game.hpp"

namespace eht::testing {

// Payoffs listed per profile as {u_0, u_1}, profiles in lexicographic order.
inline Game two_by_two(std::vector<std::vector<double>> per_profile) {
    std::vector<double> flat(8);
    for (std::size_t k = 0; k < 4; ++k) {
        flat[k] = per_profile[k][0];
        flat[4 + k] = per_profile[k][1];
    }
    return Game({2, 2}, flat);
}

inline Game stag_hunt() { return two_by_two({{4, 4}, {0, 3}, {3, 0}, {3, 3}}); }
inline Game battle_of_sexes() { return two_by_two({{2, 1}, {0, 0}, {0, 0}, {1, 2}}); }
inline Game constant_game() { return two_by_two({{1, 1}, {1, 1}, {1, 1}, {1, 1}}); }

// Three players with two actions each; u_i = number of players matching i's action.
inline Game coordination3() {
    std::vector<double> flat(3 * 8);
    for (std::size_t profile = 0; profile < 8; ++profile) {
        const std::size_t a[3] = {(profile >> 2) & 1, (profile >> 1) & 1, profile & 1};
        for (std::size_t i = 0; i < 3; ++i) {
            double matches = 0.0;
            for (std::size_t j = 0; j < 3; ++j) matches += (j != i && a[j] == a[i]) ? 1.0 : 0.0;
            flat[i * 8 + profile] = matches;
        }
    }
    return Game({2, 2, 2}, flat);
}

inline std::filesystem::path config_dir() { return std::filesystem::path(EHT_SOURCE_DIR) / "configs"; }

inline ExperimentConfig golden(const std::string& name) { return load_config(config_dir() / (name + ".json")); }

}  // namespace eht::testing
