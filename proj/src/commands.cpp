#include "eht/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include "CLI11.hpp"

#include "eht/hypothesis_test.hpp"
#include "eht/rng.hpp"
#include "eht/verification.hpp"

namespace eht {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr double kRowSumTolerance = 1e-10;
constexpr double kAgreementTolerance = 0.05;
constexpr std::size_t kSlopeEntries = 50;

bool wants(const ExperimentConfig& cfg, const std::string& format) {
    return std::find(cfg.formats.begin(), cfg.formats.end(), format) != cfg.formats.end();
}

std::ofstream open_output(const fs::path& path) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << std::setprecision(12);
    return out;
}

std::string join(const std::vector<double>& v, char sep = ';') {
    std::ostringstream s;
    s << std::setprecision(12);
    for (std::size_t k = 0; k < v.size(); ++k) s << (k ? std::string(1, sep) : "") << v[k];
    return s.str();
}

json belief_json(const BeliefProfile& b) {
    json marginals = json::array();
    for (std::size_t k = 0; k < b.marginals.size(); ++k) marginals.push_back(b.marginal(k));
    return marginals;
}

std::size_t initial_state(const ExperimentConfig& cfg, const StateSpace& space, std::uint64_t seed) {
    if (cfg.run.initial_beliefs) {
        const auto& ids = *cfg.run.initial_beliefs;
        for (std::size_t i = 0; i < ids.size(); ++i) {
            if (ids[i] >= space.belief_count(i)) {
                throw ConfigError("/run/initial_beliefs/" + std::to_string(i),
                                  "belief id out of range (player has " + std::to_string(space.belief_count(i)) +
                                      " beliefs)");
            }
        }
        return space.state_index(ids);
    }
    CounterRng rng(seed, 1);
    return std::min(space.size() - 1, static_cast<std::size_t>(rng.uniform() * static_cast<double>(space.size())));
}

Replication run_replication(const LearningDynamics& dynamics, const ExperimentConfig& cfg,
                            const std::vector<bool>& stable, std::uint64_t seed) {
    Replication rep;
    rep.seed = seed;
    rep.initial_state = initial_state(cfg, dynamics.space(), seed);
    CounterRng rng(seed, 0);
    rep.trajectory = dynamics.run(rep.initial_state, rng);
    rep.occupancy = rep.trajectory.empty() ? 0.0 : occupancy(rep.trajectory, stable);
    return rep;
}

RunConfig run_config_for(const ExperimentConfig& cfg, const AnalysisResult& analysis, double xi) {
    RunConfig rc = cfg.run_config(xi);
    rc.resamplers = analysis.params.resamplers;
    return rc;
}

Check make_check(std::string name, bool hard, bool passed, std::string detail, json data = json::object()) {
    return Check{std::move(name), hard, passed, std::move(detail), std::move(data)};
}

std::string fmt(double x) {
    std::ostringstream s;
    s << std::setprecision(6) << x;
    return s.str();
}

}  // namespace

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn) {
    if (count == 0) return;
    const unsigned workers = std::max(1u, std::min<unsigned>(threads ? threads : 1, static_cast<unsigned>(count)));
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        for (std::size_t k; (k = next.fetch_add(1)) < count;) {
            try {
                fn(k);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = count;
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

std::vector<bool> AnalysisResult::stable_mask() const {
    std::vector<bool> mask(space.size(), false);
    for (std::size_t z : stable.members) mask[z] = true;
    return mask;
}

AnalysisResult analyze(const ExperimentConfig& cfg) {
    StateSpace space(cfg.game(), cfg.granularity, cfg.sigma, state_cap());
    cfg.validate_transforms(space);
    ConsistencyTable consistency(space, cfg.tau, cfg.distance_mode);
    RunConfig rc = cfg.run_config();
    rc.resamplers = cfg.resamplers(space);
    ChainParameters params = chain_parameters(space, rc);
    ResistanceGraph graph = build_resistance_graph(space, consistency, cfg.transforms);
    if (graph.size() == 0) {
        throw ConfigError("/parameters/tau", "no consistent states at this tolerance; increase tau or M");
    }
    auto potentials = stochastic_potential_closed_form(graph);
    std::optional<std::vector<double>> trees;
    if (graph.size() <= kArborescenceLimit) trees = stochastic_potential_bruteforce(graph);
    StableSet stable = stochastically_stable_set(graph, potentials);
    CorollaryReport corollary = corollary_selection(space, graph, cfg.transforms, stable);

    std::vector<double> gaps;
    for (std::size_t z : graph.nodes) gaps.push_back(epsilon_ne_gap(space.game(), space.strategies(z)));

    std::optional<double> deviation;
    if (space.size() <= kDenseSolveLimit) {
        const auto paths = build_resistance_graph_by_paths(space, consistency, cfg.transforms);
        double worst = 0.0;
        for (std::size_t k = 0; k < graph.weights.size(); ++k) {
            worst = std::max(worst, std::abs(paths.weights[k] - graph.weights[k]));
        }
        deviation = worst;
    }
    return AnalysisResult{std::move(space), std::move(consistency), std::move(params), std::move(graph),
                          std::move(potentials), std::move(trees), std::move(stable), std::move(corollary),
                          std::move(gaps), deviation};
}

void write_analysis(const ExperimentConfig& cfg, const AnalysisResult& a, const fs::path& dir) {
    const StateSpace& space = a.space;
    const std::size_t n = space.player_count();
    const auto mask = a.stable_mask();

    if (wants(cfg, "json")) {
        json states = json::array();
        for (std::size_t k = 0; k < a.graph.size(); ++k) {
            const std::size_t z = a.graph.nodes[k];
            json beliefs = json::array(), strategies = json::array(), anticipated = json::array(),
                 realized = json::array();
            for (std::size_t i = 0; i < n; ++i) {
                beliefs.push_back(belief_json(space.player(i).beliefs[space.belief_id(z, i)]));
                strategies.push_back(space.strategy(z, i));
                anticipated.push_back(space.anticipated_utility(z, i));
                realized.push_back(space.realized_utility(z, i));
            }
            json entry{{"state", z},
                       {"belief_ids", space.belief_ids(z)},
                       {"beliefs", beliefs},
                       {"strategies", strategies},
                       {"anticipated_utility", anticipated},
                       {"realized_utility", realized},
                       {"node_value", a.graph.node_values[k]},
                       {"potential", a.potentials[k]},
                       {"epsilon_gap", a.epsilon_gaps[k]},
                       {"stochastically_stable", static_cast<bool>(mask[z])}};
            if (a.tree_potentials) entry["tree_potential"] = (*a.tree_potentials)[k];
            states.push_back(std::move(entry));
        }
        json ranges = json::array();
        for (const auto& [lo, hi] : a.corollary.utility_ranges) ranges.push_back({lo, hi});
        json report{{"name", cfg.name},
                    {"state_count", space.size()},
                    {"consistent_count", a.graph.size()},
                    {"u_bar", a.params.u_bar},
                    {"consistent_states", states},
                    {"stochastically_stable", a.stable.members},
                    {"stable_by_potential", a.stable.by_potential},
                    {"stable_by_node_value", a.stable.by_node_value},
                    {"methods_agree", a.stable.methods_agree},
                    {"corollary",
                     {{"case", a.corollary.case_name},
                      {"target", a.corollary.target},
                      {"matches_stable_set", a.corollary.matches_stable_set},
                      {"utility_ranges", ranges}}}};
        if (a.corollary.case_name == "dominated_player") {
            report["corollary"]["dominated_player"] = a.corollary.dominated_player;
        }
        report["path_resistance_deviation"] = a.path_resistance_deviation ? json(*a.path_resistance_deviation) : json(nullptr);
        open_output(dir / "analysis.json") << report.dump(2) << '\n';
    }
    if (wants(cfg, "csv")) {
        auto out = open_output(dir / "consistent_states.csv");
        out << "state";
        for (std::size_t i = 0; i < n; ++i) out << ",belief_" << i << ",strategy_" << i << ",anticipated_" << i;
        out << ",node_value,potential,epsilon_gap,stochastically_stable\n";
        for (std::size_t k = 0; k < a.graph.size(); ++k) {
            const std::size_t z = a.graph.nodes[k];
            out << z;
            for (std::size_t i = 0; i < n; ++i) {
                std::vector<double> flat;
                for (const auto& m : belief_json(space.player(i).beliefs[space.belief_id(z, i)])) {
                    for (double x : m) flat.push_back(x);
                }
                out << ',' << join(flat) << ',' << join(space.strategy(z, i)) << ','
                    << space.anticipated_utility(z, i);
            }
            out << ',' << a.graph.node_values[k] << ',' << a.potentials[k] << ',' << a.epsilon_gaps[k] << ','
                << (mask[z] ? 1 : 0) << '\n';
        }
    }
}

double stable_mass(const AnalysisResult& a, double xi) {
    const auto model = idealized_transition_matrix(a.space, a.consistency, a.params, xi);
    const auto mu = stationary_distribution(model);
    double mass = 0.0;
    for (std::size_t z : a.stable.members) mass += mu[z];
    return mass;
}

SimulationResult simulate(const ExperimentConfig& cfg, const AnalysisResult& a, unsigned threads) {
    SimulationResult sim;
    sim.xi = cfg.run.xi;
    sim.tolerance = kAgreementTolerance;
    LearningDynamics dynamics(a.space, run_config_for(cfg, a, cfg.run.xi));
    sim.epoch_length = dynamics.epoch_length();
    sim.epoch_length_capped = dynamics.epoch_length_capped();
    sim.stable_mass = stable_mass(a, cfg.run.xi);

    const auto mask = a.stable_mask();
    sim.replications.resize(cfg.run.replications);
    parallel_for(sim.replications.size(), threads, [&](std::size_t r) {
        sim.replications[r] = run_replication(dynamics, cfg, mask, cfg.run.seed + r);
    });
    for (const auto& rep : sim.replications) {
        if (!rep.trajectory.empty() && std::abs(rep.occupancy - sim.stable_mass) <= sim.tolerance) ++sim.agreeing;
    }
    return sim;
}

void write_simulation(const ExperimentConfig& cfg, const SimulationResult& sim, const fs::path& dir) {
    if (wants(cfg, "ndjson")) {
        for (const auto& rep : sim.replications) {
            auto out = open_output(dir / ("trajectory_seed" + std::to_string(rep.seed) + ".ndjson"));
            json header{{"header",
                         {{"config", cfg.name},
                          {"seed", rep.seed},
                          {"xi", sim.xi},
                          {"epoch_length", sim.epoch_length},
                          {"initial_state", rep.initial_state}}}};
            out << header.dump() << '\n';
            for (const auto& log : rep.trajectory) out << to_ndjson(log) << '\n';
        }
    }
    if (wants(cfg, "csv")) {
        auto out = open_output(dir / "occupancy.csv");
        out << "seed,epochs,initial_state,occupancy_stable,stationary_stable,abs_difference,agree\n";
        for (const auto& rep : sim.replications) {
            const double diff = std::abs(rep.occupancy - sim.stable_mass);
            out << rep.seed << ',' << rep.trajectory.size() << ',' << rep.initial_state << ',' << rep.occupancy << ','
                << sim.stable_mass << ',' << diff << ',' << (!rep.trajectory.empty() && diff <= sim.tolerance ? 1 : 0)
                << '\n';
        }
    }
    if (wants(cfg, "json")) {
        json reps = json::array();
        for (const auto& rep : sim.replications) {
            reps.push_back({{"seed", rep.seed},
                            {"epochs", rep.trajectory.size()},
                            {"initial_state", rep.initial_state},
                            {"occupancy_stable", rep.occupancy}});
        }
        json report{{"xi", sim.xi},
                    {"stationary_stable", sim.stable_mass},
                    {"epoch_length", sim.epoch_length},
                    {"epoch_length_capped", sim.epoch_length_capped},
                    {"tolerance", sim.tolerance},
                    {"agreeing", sim.agreeing},
                    {"majority_agree", sim.majority_agree()},
                    {"replications", reps}};
        open_output(dir / "simulation.json") << report.dump(2) << '\n';
    }
}

bool VerificationResult::hard_failure() const {
    return std::any_of(checks.begin(), checks.end(), [](const Check& c) { return c.hard && !c.passed; });
}

bool VerificationResult::warnings() const {
    return std::any_of(checks.begin(), checks.end(), [](const Check& c) { return !c.hard && !c.passed; });
}

VerificationResult verify(const ExperimentConfig& cfg, const AnalysisResult& a, unsigned threads) {
    VerificationResult result;
    auto& checks = result.checks;
    const StateSpace& space = a.space;
    const Game& game = space.game();

    const auto p0 = unperturbed_matrix(space, a.consistency, a.params.test_probs, a.params.resamplers);
    const double p0_err = p0.max_row_sum_error();
    checks.push_back(make_check("row_sums_unperturbed", true, p0_err <= kRowSumTolerance,
                                "max |row sum - 1| = " + fmt(p0_err), {{"max_error", p0_err}}));
    const auto pxi = idealized_transition_matrix(space, a.consistency, a.params, cfg.run.xi);
    const double pxi_err = pxi.max_row_sum_error();
    checks.push_back(make_check("row_sums_idealized", true, pxi_err <= kRowSumTolerance,
                                "xi = " + fmt(cfg.run.xi) + ", max |row sum - 1| = " + fmt(pxi_err),
                                {{"xi", cfg.run.xi}, {"max_error", pxi_err}}));

    if (a.tree_potentials) {
        const bool exact = a.graph.size() <= kBruteForceTreeLimit;
        double worst = 0.0;
        bool ok = true;
        for (std::size_t k = 0; k < a.graph.size(); ++k) {
            const double d = std::abs((*a.tree_potentials)[k] - a.potentials[k]);
            worst = std::max(worst, d);
            if (exact ? d != 0.0 : d > 1e-9 * std::max(1.0, std::abs(a.potentials[k]))) ok = false;
        }
        checks.push_back(make_check("potential_oracle", true, ok,
                                    std::string(exact ? "exhaustive j-trees" : "Chu-Liu/Edmonds") +
                                        " vs closed form, max difference " + fmt(worst),
                                    {{"max_difference", worst}, {"exact", exact}}));
    }
    checks.push_back(make_check("stable_set_methods_agree", true, a.stable.methods_agree,
                                "argmin potential vs argmax node value"));

    const auto lipschitz = verify_lipschitz(game, space.sigma(), 10000, cfg.run.seed);
    checks.push_back(make_check("lipschitz", true, lipschitz.max_ratio <= 1.0 + 1e-6,
                                "max ratio " + fmt(lipschitz.max_ratio) + " over 10000 pairs",
                                {{"max_ratio", lipschitz.max_ratio}}));

    if (a.path_resistance_deviation) {
        checks.push_back(make_check("resistance_paths_match_node_values", false, *a.path_resistance_deviation <= 1e-9,
                                    "max |shortest-path r-hat - node value| = " + fmt(*a.path_resistance_deviation)));
    }

    const auto classes = recurrent_classes(p0);
    bool singletons = classes.size() == a.graph.size();
    for (std::size_t k = 0; singletons && k < classes.size(); ++k) {
        singletons = classes[k].size() == 1 && classes[k][0] == a.graph.nodes[k];
    }
    checks.push_back(make_check("recurrent_classes_are_consistent_singletons", false, singletons,
                                std::to_string(classes.size()) + " closed classes, " +
                                    std::to_string(a.graph.size()) + " consistent states"));

    const auto cert = check_assumption1(game, cfg.epsilon, cfg.sigma, cfg.tau, cfg.granularity);
    checks.push_back(make_check(
        "assumption1_bounds", false, cert.passes(),
        "sigma " + fmt(cfg.sigma) + " <= " + fmt(cert.sigma_bound) + (cert.sigma_ok ? " ok" : " violated") + "; tau " +
            fmt(cfg.tau) + " <= " + fmt(cert.tau_bound) + (cert.tau_ok ? " ok" : " violated") + "; M " +
            std::to_string(cfg.granularity) + " >= " + fmt(cert.M_bound) + (cert.M_ok ? " ok" : " violated"),
        {{"epsilon", cert.epsilon},
         {"sigma_bound", cert.sigma_bound},
         {"tau_bound", cert.tau_bound},
         {"M_bound", cert.M_bound},
         {"players", cert.players},
         {"max_actions", cert.max_actions},
         {"joint_profiles", cert.joint_profiles},
         {"max_action_times_opponents", cert.max_action_times_opponents},
         {"max_payoff", cert.max_payoff}}));

    try {
        const auto prop2 = verify_prop2_constructive(game, cfg.epsilon, cfg.sigma, cfg.tau, cfg.granularity,
                                                     cfg.distance_mode);
        checks.push_back(make_check(
            "prop2_constructive", false, prop2.passes(),
            "||pi*-b|| " + fmt(prop2.belief_to_fixed_point) + ", ||Br(pi*)-Br(b)|| " + fmt(prop2.response_shift) +
                ", ||b-pi|| " + fmt(prop2.belief_to_response) + " vs tau " + fmt(cfg.tau) + "; gap " +
                fmt(prop2.epsilon_gap) + " vs eps " + fmt(cfg.epsilon),
            {{"belief_to_fixed_point", prop2.belief_to_fixed_point},
             {"response_shift", prop2.response_shift},
             {"belief_to_response", prop2.belief_to_response},
             {"epsilon_gap", prop2.epsilon_gap},
             {"fixed_point_residual", prop2.fixed_point.residual},
             {"fixed_point", prop2.fixed_point.profile}}));
    } catch (const ConvergenceError& e) {
        checks.push_back(make_check("prop2_constructive", false, false, e.what()));
    }

    const auto a2 = check_assumption2(space, cfg.tau, cfg.distance_mode);
    std::string a2_detail = std::to_string(a2.cells.size()) + " cells";
    json a2_data{{"cells", a2.cells.size()}};
    if (a2.first_failure) {
        a2_detail += ", no witness for player " + std::to_string(a2.first_failure->player);
        a2_data["first_failure"] = {{"player", a2.first_failure->player},
                                    {"opponent_beliefs", a2.first_failure->opponent_beliefs},
                                    {"margin", a2.first_failure->margin}};
    }
    checks.push_back(make_check("assumption2", false, a2.passes, a2_detail, a2_data));

    const auto simple = check_simple_condition(space, cfg.tau, cfg.distance_mode);
    checks.push_back(make_check("assumption2_sufficient_condition", false, simple.passes(),
                                "tau threshold " + fmt(simple.tau_threshold),
                                {{"image_sizes", simple.image_sizes}, {"tau_threshold", simple.tau_threshold}}));

    // Test calibration at alpha = 0.05 on pairs taken from the state space.
    constexpr double kAlpha = 0.05;
    constexpr std::uint64_t kTrials = 2000;
    const auto bound = required_sample_size(game, cfg.granularity, cfg.sigma, cfg.tau, kAlpha);
    const TestConfig test{cfg.tau, kAlpha, bound.tests_needed ? bound.sample_size : 1};
    struct Pair {
        std::size_t state, player;
        bool consistent;
    };
    std::vector<Pair> pairs;
    for (std::size_t z = 0; z < space.size() && pairs.size() < 10; ++z) {
        for (std::size_t i = 0; i < space.player_count(); ++i) {
            const double d = space.distance(z, i, DistanceMode::joint_product);
            if (d <= cfg.tau && std::count_if(pairs.begin(), pairs.end(), [](auto& p) { return p.consistent; }) < 5) {
                pairs.push_back({z, i, true});
            } else if (d >= 2.0 * cfg.tau &&
                       std::count_if(pairs.begin(), pairs.end(), [](auto& p) { return !p.consistent; }) < 5) {
                pairs.push_back({z, i, false});
            }
        }
    }
    std::vector<ErrorRateEstimate> rates(pairs.size());
    parallel_for(pairs.size(), threads, [&](std::size_t k) {
        const auto& p = pairs[k];
        const auto belief = space.player(p.player).products[space.belief_id(p.state, p.player)];
        const auto truth = opponent_distribution(game, p.player, space.strategies(p.state));
        rates[k] = estimate_error_rates(belief, truth, test, kTrials, cfg.run.seed + k);
    });
    bool calibrated = true;
    json rate_rows = json::array();
    for (std::size_t k = 0; k < rates.size(); ++k) {
        if (rates[k].rate > kAlpha + rates[k].half_width) calibrated = false;
        rate_rows.push_back({{"state", pairs[k].state},
                             {"player", pairs[k].player},
                             {"consistent", pairs[k].consistent},
                             {"distance", rates[k].distance},
                             {"error_rate", rates[k].rate}});
    }
    checks.push_back(make_check("test_calibration", false, calibrated,
                                std::to_string(pairs.size()) + " pairs, T = " + std::to_string(test.sample_size),
                                {{"sample_size", test.sample_size}, {"pairs", rate_rows}}));
    return result;
}

void write_verification(const VerificationResult& result, const fs::path& dir) {
    json checks = json::array();
    for (const auto& c : result.checks) {
        checks.push_back({{"name", c.name}, {"hard", c.hard}, {"passed", c.passed}, {"detail", c.detail},
                          {"data", c.data}});
    }
    json report{{"hard_failure", result.hard_failure()}, {"warnings", result.warnings()}, {"checks", checks}};
    open_output(dir / "verification.json") << report.dump(2) << '\n';
}

std::vector<SweepRow> sweep(const ExperimentConfig& cfg, const AnalysisResult& a, unsigned threads) {
    const auto& grid = cfg.run.xi_grid;
    if (grid.size() < 2) throw ConfigError("/run/xi_grid", "a sweep needs at least two xi values");
    const auto entries = positive_resistance_entries(a.space, a.consistency, a.params.transforms, kSlopeEntries);
    const auto mask = a.stable_mask();
    std::vector<SweepRow> rows(grid.size());
    parallel_for(grid.size(), threads, [&](std::size_t k) {
        const double xi = grid[k];
        SweepRow& row = rows[k];
        row.xi = xi;
        row.stable_mass = stable_mass(a, xi);
        const std::vector<double> local{xi, xi / 10.0, xi / 100.0};
        for (const auto& s : perturbation_slope_check(a.space, a.consistency, a.params, entries, local)) {
            row.slope_max_relative_error = std::max(row.slope_max_relative_error, s.relative_error);
        }
        if (cfg.run.simulate_in_sweep && cfg.run.epochs > 0) {
            LearningDynamics dynamics(a.space, run_config_for(cfg, a, xi));
            row.occupancy = run_replication(dynamics, cfg, mask, cfg.run.seed).occupancy;
        }
    });
    return rows;
}

void write_sweep(const std::vector<SweepRow>& rows, const fs::path& dir) {
    auto out = open_output(dir / "sweep.csv");
    out << "xi,stationary_stable,occupancy_stable,slope_max_relative_error\n";
    for (const auto& r : rows) {
        out << r.xi << ',' << r.stable_mass << ',';
        if (r.occupancy) out << *r.occupancy;
        out << ',' << r.slope_max_relative_error << '\n';
    }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Hypothesis-testing learning dynamics: analysis, simulation and verification", "eht-lab"};
    app.require_subcommand(1);
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    unsigned threads = std::max(1u, std::thread::hardware_concurrency());
    const char* names[] = {"analyze", "simulate", "verify", "sweep"};
    const char* help[] = {"stochastically stable states of the exact chain", "run the learning dynamics",
                          "check assumptions, oracles and invariants", "stationary mass over a xi grid"};
    std::vector<CLI::App*> subs;
    std::vector<CLI::Option*> seed_opts;
    for (int k = 0; k < 4; ++k) {
        auto* sub = app.add_subcommand(names[k], help[k]);
        sub->add_option("config", config_path, "experiment config (JSON)")->required();
        sub->add_option("--out", out_dir, "output directory (overrides outputs.directory)");
        seed_opts.push_back(sub->add_option("--seed", seed, "base seed (overrides run.seed)"));
        sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
        subs.push_back(sub);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        ExperimentConfig cfg = load_config(config_path);
        if (std::any_of(seed_opts.begin(), seed_opts.end(), [](CLI::Option* o) { return o->count() > 0; })) {
            cfg.run.seed = seed;
        }
        const fs::path dir = out_dir.empty() ? fs::path(cfg.output_directory) : fs::path(out_dir);
        const AnalysisResult analysis = analyze(cfg);

        if (subs[0]->parsed()) {
            write_analysis(cfg, analysis, dir);
            out << cfg.name << ": " << analysis.space.size() << " states, " << analysis.graph.size()
                << " consistent, " << analysis.stable.members.size() << " stochastically stable ("
                << analysis.corollary.case_name << ")\n";
            for (std::size_t z : analysis.stable.members) {
                out << "  state " << z << ":";
                for (std::size_t i = 0; i < analysis.space.player_count(); ++i) {
                    out << " " << cfg.players[i] << "=[" << join(analysis.space.strategy(z, i), ' ') << "]";
                }
                out << '\n';
            }
            return kExitOk;
        }
        if (subs[1]->parsed()) {
            const auto sim = simulate(cfg, analysis, threads);
            write_simulation(cfg, sim, dir);
            for (const auto& rep : sim.replications) {
                out << "seed " << rep.seed << ": occupancy(Z*) = " << rep.occupancy
                    << ", mu(Z*) = " << sim.stable_mass << (std::abs(rep.occupancy - sim.stable_mass) <= sim.tolerance
                                                                ? " agree"
                                                                : " disagree")
                    << '\n';
            }
            out << "agreement: " << sim.agreeing << "/" << sim.replications.size() << " within " << sim.tolerance
                << (sim.epoch_length_capped ? " (epoch length capped at " : " (epoch length ") << sim.epoch_length
                << ")\n";
            return kExitOk;
        }
        if (subs[2]->parsed()) {
            const auto result = verify(cfg, analysis, threads);
            write_verification(result, dir);
            for (const auto& c : result.checks) {
                out << (c.passed ? "PASS " : (c.hard ? "FAIL " : "WARN ")) << c.name << ": " << c.detail << '\n';
            }
            return result.hard_failure() ? kExitInvariant : kExitOk;
        }
        const auto rows = sweep(cfg, analysis, threads);
        write_sweep(rows, dir);
        for (const auto& r : rows) {
            out << "xi " << r.xi << ": mu(Z*) = " << r.stable_mass << ", slope error " << r.slope_max_relative_error
                << '\n';
        }
        return kExitOk;
    } catch (const ConfigError& e) {
        err << e.what() << '\n';
        return kExitConfig;
    } catch (const CapacityError& e) {
        err << "capacity exceeded: " << e.what() << '\n';
        return kExitCapacity;
    } catch (const ConvergenceError& e) {
        err << "invariant failure: " << e.what() << '\n';
        return kExitInvariant;
    } catch (const std::domain_error& e) {
        err << "invariant failure: " << e.what() << '\n';
        return kExitInvariant;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitInternal;
    }
}

}  // namespace eht
