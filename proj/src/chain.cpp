#include "eht/chain.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>

#include "eht/arborescence.hpp"

namespace eht {

namespace {

// Dense matrices beyond this many states are refused (8000^2 doubles is 512 MB).
constexpr std::size_t kDenseMatrixLimit = 8000;

void check_dense(std::size_t n) {
    if (n > kDenseMatrixLimit) throw CapacityError("dense transition matrix", n, kDenseMatrixLimit);
}

bool within_tie(double value, double best) {
    return std::abs(value - best) <= kTieTolerance * std::max(1.0, std::abs(best));
}

std::vector<Resampler> resolve_resamplers(const StateSpace& space, std::span<const Resampler> given) {
    std::vector<Resampler> out;
    for (std::size_t i = 0; i < space.player_count(); ++i) {
        if (given.empty()) {
            out.push_back(Resampler::uniform(space.belief_count(i)));
        } else {
            if (given.size() != space.player_count() || given[i].size() != space.belief_count(i)) {
                throw std::invalid_argument("resampler does not match the belief space");
            }
            out.push_back(given[i]);
        }
    }
    return out;
}

// Probability that player i leaves its belief in one epoch (before resampling
// picks where it goes).
using ChangeMass = std::function<double(std::size_t state, std::size_t player)>;

// Builds P as a Kronecker product of per-player factors
// (1 - c_i) delta(b_i, b_i') + c_i psi_i(b_i' | b_i).
TransitionModel product_chain(const StateSpace& space, std::span<const Resampler> resamplers, const ChangeMass& mass) {
    const std::size_t n = space.size();
    check_dense(n);
    TransitionModel model;
    model.state_count = n;
    model.entries.assign(n * n, 0.0);
    const std::size_t players = space.player_count();
    std::vector<double> row, next;
    for (std::size_t z = 0; z < n; ++z) {
        const auto ids = space.belief_ids(z);
        row.assign(1, 1.0);
        for (std::size_t i = 0; i < players; ++i) {
            const double c = mass(z, i);
            const auto psi = resamplers[i].row(ids[i]);
            next.assign(row.size() * psi.size(), 0.0);
            for (std::size_t a = 0; a < row.size(); ++a) {
                if (row[a] == 0.0) continue;
                for (std::size_t b = 0; b < psi.size(); ++b) {
                    const double f = c * psi[b] + (b == ids[i] ? 1.0 - c : 0.0);
                    next[a * psi.size() + b] = row[a] * f;
                }
            }
            row.swap(next);
        }
        std::copy(row.begin(), row.end(), model.entries.begin() + static_cast<std::ptrdiff_t>(z * n));
    }
    return model;
}

double idealized_mass(const StateSpace& space, const ConsistencyTable& consistency, const ChainParameters& params,
                      std::size_t state, std::size_t player, double xi) {
    const double alpha = std::pow(xi, params.u_bar);
    const double reject = consistency.player_consistent(state, player) ? alpha : 1.0 - alpha;
    const double exponent = params.transforms[player](space.anticipated_utility(state, player));
    const double explore = std::pow(xi, exponent);
    return params.test_probs[player] * (reject + (1.0 - reject) * explore);
}

void check_parameters(const StateSpace& space, const ChainParameters& params) {
    const std::size_t n = space.player_count();
    if (params.test_probs.size() != n || params.transforms.size() != n) {
        throw std::invalid_argument("chain parameters need one gamma and one transform per player");
    }
    if (!params.resamplers.empty() && params.resamplers.size() != n) {
        throw std::invalid_argument("chain parameters need one resampler per player");
    }
}

double residual(const TransitionModel& model, std::span<const double> mu) {
    const std::size_t n = model.state_count;
    std::vector<double> next(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (mu[i] == 0.0) continue;
        const auto row = model.row(i);
        for (std::size_t j = 0; j < n; ++j) next[j] += mu[i] * row[j];
    }
    double r = 0.0;
    for (std::size_t j = 0; j < n; ++j) r += std::abs(next[j] - mu[j]);
    return r;
}

// Grassmann-Taksar-Heyman elimination: subtraction-free, hence accurate even
// when the chain is nearly decomposable (tiny xi).
std::vector<double> gth(const TransitionModel& model) {
    const std::size_t n = model.state_count;
    std::vector<double> a = model.entries;
    for (std::size_t k = n; k-- > 1;) {
        double s = 0.0;
        for (std::size_t j = 0; j < k; ++j) s += a[k * n + j];
        if (!(s > 0.0)) throw std::domain_error("chain is reducible");
        for (std::size_t i = 0; i < k; ++i) a[i * n + k] /= s;
        for (std::size_t i = 0; i < k; ++i) {
            const double aik = a[i * n + k];
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < k; ++j) a[i * n + j] += aik * a[k * n + j];
        }
    }
    std::vector<double> mu(n, 0.0);
    mu[0] = 1.0;
    for (std::size_t k = 1; k < n; ++k) {
        double s = 0.0;
        for (std::size_t i = 0; i < k; ++i) s += mu[i] * a[i * n + k];
        mu[k] = s;
    }
    const double total = std::accumulate(mu.begin(), mu.end(), 0.0);
    for (double& m : mu) m /= total;
    return mu;
}

std::vector<double> power_iteration(const TransitionModel& model) {
    const std::size_t n = model.state_count;
    std::vector<double> mu(n, 1.0 / static_cast<double>(n)), next(n);
    constexpr std::size_t kMaxIterations = 20000;
    for (std::size_t it = 0; it < kMaxIterations; ++it) {
        // Lazy chain (P + I) / 2 has the same stationary law and is aperiodic.
        for (std::size_t j = 0; j < n; ++j) next[j] = 0.5 * mu[j];
        for (std::size_t i = 0; i < n; ++i) {
            const double half = 0.5 * mu[i];
            if (half == 0.0) continue;
            const auto row = model.row(i);
            for (std::size_t j = 0; j < n; ++j) next[j] += half * row[j];
        }
        double diff = 0.0;
        for (std::size_t j = 0; j < n; ++j) diff += std::abs(next[j] - mu[j]);
        mu.swap(next);
        if (diff < 1e-14) return mu;
    }
    throw ConvergenceError("power iteration did not converge", residual(model, mu));
}

}  // namespace

ChainParameters chain_parameters(const StateSpace& space, const RunConfig& config) {
    config.validate(space.player_count());
    ChainParameters p;
    p.test_probs = config.test_probs;
    p.transforms = config.transforms;
    p.resamplers = resolve_resamplers(space, config.resamplers);
    p.tau = config.tau;
    p.distance_mode = config.distance_mode;
    p.u_bar = config.u_bar_override ? *config.u_bar_override : u_bar(space.game(), config.transforms);
    return p;
}

ConsistencyTable::ConsistencyTable(const StateSpace& space, double tau, DistanceMode mode)
    : players_(space.player_count()) {
    if (!(tau > 0.0)) throw std::invalid_argument("tau must be positive");
    const std::size_t n = space.size();
    flags_.resize(n * players_);
    distances_.resize(n * players_);
    state_flags_.assign(n, true);
    for (std::size_t z = 0; z < n; ++z) {
        for (std::size_t i = 0; i < players_; ++i) {
            const double d = space.distance(z, i, mode);
            distances_[z * players_ + i] = d;
            flags_[z * players_ + i] = d <= tau ? 1 : 0;
            if (d > tau) state_flags_[z] = false;
        }
    }
}

std::vector<std::size_t> ConsistencyTable::consistent_states() const {
    std::vector<std::size_t> out;
    for (std::size_t z = 0; z < state_flags_.size(); ++z) {
        if (state_flags_[z]) out.push_back(z);
    }
    return out;
}

std::vector<std::size_t> consistent_states(const StateSpace& space, double tau, DistanceMode mode) {
    return ConsistencyTable(space, tau, mode).consistent_states();
}

double TransitionModel::max_row_sum_error() const {
    double worst = 0.0;
    for (std::size_t i = 0; i < state_count; ++i) {
        const auto r = row(i);
        worst = std::max(worst, std::abs(std::accumulate(r.begin(), r.end(), 0.0) - 1.0));
    }
    return worst;
}

TransitionModel unperturbed_matrix(const StateSpace& space, const ConsistencyTable& consistency,
                                   std::span<const double> test_probs, std::span<const Resampler> resamplers) {
    if (test_probs.size() != space.player_count()) throw std::invalid_argument("need one gamma per player");
    const auto kernels = resolve_resamplers(space, resamplers);
    auto model = product_chain(space, kernels, [&](std::size_t z, std::size_t i) {
        return consistency.player_consistent(z, i) ? 0.0 : test_probs[i];
    });
    model.xi = 0.0;
    model.error_model = "unperturbed";
    return model;
}

TransitionModel idealized_transition_matrix(const StateSpace& space, const ConsistencyTable& consistency,
                                            const ChainParameters& params, double xi) {
    check_parameters(space, params);
    if (!(xi > 0.0 && xi < 1.0)) throw std::invalid_argument("xi must lie in (0, 1)");
    const auto kernels = resolve_resamplers(space, params.resamplers);
    auto model = product_chain(space, kernels, [&](std::size_t z, std::size_t i) {
        return idealized_mass(space, consistency, params, z, i, xi);
    });
    model.xi = xi;
    return model;
}

double idealized_entry(const StateSpace& space, const ConsistencyTable& consistency, const ChainParameters& params,
                       std::size_t from, std::size_t to, double xi) {
    check_parameters(space, params);
    const auto a = space.belief_ids(from);
    const auto b = space.belief_ids(to);
    double p = 1.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double c = idealized_mass(space, consistency, params, from, i, xi);
        const double psi = params.resamplers.empty() ? 1.0 / static_cast<double>(space.belief_count(i))
                                                     : params.resamplers[i].probability(a[i], b[i]);
        p *= c * psi + (a[i] == b[i] ? 1.0 - c : 0.0);
    }
    return p;
}

std::vector<std::vector<std::size_t>> strongly_connected_components(const TransitionModel& model) {
    // Iterative Tarjan over the dense support.
    const std::size_t n = model.state_count;
    constexpr std::size_t kUnvisited = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> index(n, kUnvisited), low(n, 0), cursor(n, 0), stack, call;
    std::vector<bool> on_stack(n, false);
    std::vector<std::vector<std::size_t>> components;
    std::size_t counter = 0;
    for (std::size_t s = 0; s < n; ++s) {
        if (index[s] != kUnvisited) continue;
        call.push_back(s);
        index[s] = low[s] = counter++;
        stack.push_back(s);
        on_stack[s] = true;
        while (!call.empty()) {
            const std::size_t v = call.back();
            const auto row = model.row(v);
            bool descended = false;
            while (cursor[v] < n) {
                const std::size_t w = cursor[v]++;
                if (row[w] <= 0.0) continue;
                if (index[w] == kUnvisited) {
                    index[w] = low[w] = counter++;
                    stack.push_back(w);
                    on_stack[w] = true;
                    call.push_back(w);
                    descended = true;
                    break;
                }
                if (on_stack[w]) low[v] = std::min(low[v], index[w]);
            }
            if (descended) continue;
            call.pop_back();
            if (!call.empty()) low[call.back()] = std::min(low[call.back()], low[v]);
            if (low[v] == index[v]) {
                std::vector<std::size_t> comp;
                std::size_t w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = false;
                    comp.push_back(w);
                } while (w != v);
                std::sort(comp.begin(), comp.end());
                components.push_back(std::move(comp));
            }
        }
    }
    return components;
}

std::vector<std::vector<std::size_t>> recurrent_classes(const TransitionModel& model) {
    const std::size_t n = model.state_count;
    auto components = strongly_connected_components(model);
    std::vector<std::size_t> owner(n);
    for (std::size_t c = 0; c < components.size(); ++c) {
        for (std::size_t v : components[c]) owner[v] = c;
    }
    std::vector<std::vector<std::size_t>> closed;
    for (std::size_t c = 0; c < components.size(); ++c) {
        bool is_closed = true;
        for (std::size_t v : components[c]) {
            const auto row = model.row(v);
            for (std::size_t w = 0; w < n && is_closed; ++w) {
                if (row[w] > 0.0 && owner[w] != c) is_closed = false;
            }
            if (!is_closed) break;
        }
        if (is_closed) closed.push_back(components[c]);
    }
    std::sort(closed.begin(), closed.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
    return closed;
}

std::vector<double> stationary_distribution(const TransitionModel& model) {
    const std::size_t n = model.state_count;
    if (n == 0 || model.entries.size() != n * n) throw std::invalid_argument("malformed transition matrix");
    const auto components = strongly_connected_components(model);
    if (components.size() != 1) {
        throw std::domain_error("chain is reducible (" + std::to_string(components.size()) +
                                " strongly connected components)");
    }
    auto mu = n <= kDenseSolveLimit ? gth(model) : power_iteration(model);
    const double r = residual(model, mu);
    if (!(r <= 1e-10)) throw ConvergenceError("stationary distribution residual too large", r);
    return mu;
}

double edge_resistance(const StateSpace& space, const ConsistencyTable& consistency,
                       std::span<const UtilityTransform> transforms, std::size_t from, std::size_t to) {
    double r = 0.0;
    for (std::size_t i = 0; i < space.player_count(); ++i) {
        if (!consistency.player_consistent(from, i)) continue;
        if (space.belief_id(from, i) == space.belief_id(to, i)) continue;
        r += transforms[i](space.anticipated_utility(from, i));
    }
    return r;
}

std::vector<double> all_edge_resistances(const StateSpace& space, const ConsistencyTable& consistency,
                                         std::span<const UtilityTransform> transforms) {
    const std::size_t n = space.size();
    check_dense(n);
    std::vector<double> r(n * n, 0.0);
    for (std::size_t z = 0; z < n; ++z) {
        for (std::size_t w = 0; w < n; ++w) {
            if (z != w) r[z * n + w] = edge_resistance(space, consistency, transforms, z, w);
        }
    }
    return r;
}

std::vector<double> min_path_resistances_from(std::span<const double> edge_weights, std::size_t node_count,
                                              std::size_t source) {
    if (edge_weights.size() != node_count * node_count) throw std::invalid_argument("weight matrix is not square");
    if (source >= node_count) throw std::out_of_range("source out of range");
    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(node_count, kInf);
    std::vector<bool> done(node_count, false);
    dist[source] = 0.0;
    for (std::size_t round = 0; round < node_count; ++round) {
        std::size_t u = node_count;
        for (std::size_t v = 0; v < node_count; ++v) {
            if (!done[v] && (u == node_count || dist[v] < dist[u])) u = v;
        }
        if (u == node_count || dist[u] == kInf) break;
        done[u] = true;
        for (std::size_t v = 0; v < node_count; ++v) {
            const double w = edge_weights[u * node_count + v];
            if (w < 0.0) throw std::invalid_argument("negative resistance");
            if (!done[v] && dist[u] + w < dist[v]) dist[v] = dist[u] + w;
        }
    }
    return dist;
}

double min_path_resistance(std::size_t from, std::size_t to, std::span<const double> edge_weights,
                           std::size_t node_count) {
    return min_path_resistances_from(edge_weights, node_count, from).at(to);
}

double node_value(const StateSpace& space, std::span<const UtilityTransform> transforms, std::size_t state) {
    double v = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < space.player_count(); ++i) {
        v = std::min(v, transforms[i](space.anticipated_utility(state, i)));
    }
    return v;
}

ResistanceGraph build_resistance_graph(const StateSpace& space, const ConsistencyTable& consistency,
                                       std::span<const UtilityTransform> transforms) {
    if (transforms.size() != space.player_count()) throw std::invalid_argument("need one transform per player");
    ResistanceGraph g;
    g.nodes = consistency.consistent_states();
    const std::size_t k = g.nodes.size();
    for (std::size_t z : g.nodes) g.node_values.push_back(node_value(space, transforms, z));
    g.weights.assign(k * k, 0.0);
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = 0; b < k; ++b) {
            if (a != b) g.weights[a * k + b] = g.node_values[a];
        }
    }
    return g;
}

ResistanceGraph build_resistance_graph_by_paths(const StateSpace& space, const ConsistencyTable& consistency,
                                                std::span<const UtilityTransform> transforms) {
    ResistanceGraph g = build_resistance_graph(space, consistency, transforms);
    const std::size_t k = g.size();
    const std::size_t n = space.size();
    const auto edges = all_edge_resistances(space, consistency, transforms);
    for (std::size_t a = 0; a < k; ++a) {
        const auto dist = min_path_resistances_from(edges, n, g.nodes[a]);
        for (std::size_t b = 0; b < k; ++b) {
            g.weights[a * k + b] = a == b ? 0.0 : dist[g.nodes[b]];
        }
    }
    return g;
}

std::vector<double> stochastic_potential_closed_form(const ResistanceGraph& graph) {
    const std::size_t k = graph.size();
    std::vector<double> phi(k, 0.0);
    for (std::size_t z = 0; z < k; ++z) {
        double s = 0.0;
        for (std::size_t w = 0; w < k; ++w) {
            if (w != z) s += graph.node_values[w];
        }
        phi[z] = s;
    }
    return phi;
}

std::vector<double> stochastic_potential_bruteforce(const ResistanceGraph& graph) {
    const std::size_t k = graph.size();
    if (k > kArborescenceLimit) throw CapacityError("j-tree enumeration", k, kArborescenceLimit);
    std::vector<double> phi(k);
    for (std::size_t root = 0; root < k; ++root) {
        phi[root] = k <= kBruteForceTreeLimit ? min_in_tree_bruteforce(graph.weights, k, root)
                                              : min_in_tree_edmonds(graph.weights, k, root);
    }
    return phi;
}

StableSet stochastically_stable_set(const ResistanceGraph& graph, std::span<const double> potentials) {
    const std::size_t k = graph.size();
    if (k == 0) throw std::domain_error("no consistent states: the stable set is undefined");
    if (potentials.size() != k) throw std::invalid_argument("one potential per consistent state required");
    StableSet s;
    const double min_phi = *std::min_element(potentials.begin(), potentials.end());
    s.max_node_value = *std::max_element(graph.node_values.begin(), graph.node_values.end());
    for (std::size_t a = 0; a < k; ++a) {
        if (within_tie(potentials[a], min_phi)) s.by_potential.push_back(graph.nodes[a]);
        if (within_tie(graph.node_values[a], s.max_node_value)) s.by_node_value.push_back(graph.nodes[a]);
    }
    s.members = s.by_potential;
    s.methods_agree = s.by_potential == s.by_node_value;
    return s;
}

CorollaryReport corollary_selection(const StateSpace& space, const ResistanceGraph& graph,
                                    std::span<const UtilityTransform> transforms, const StableSet& stable) {
    const std::size_t n = space.player_count();
    if (graph.size() == 0) throw std::domain_error("no consistent states");
    CorollaryReport report;
    for (std::size_t i = 0; i < n; ++i) {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (std::size_t z : graph.nodes) {
            lo = std::min(lo, space.anticipated_utility(z, i));
            hi = std::max(hi, space.anticipated_utility(z, i));
        }
        report.utility_ranges.emplace_back(lo, hi);
    }

    // Score per consistent node; the target is its argmax.
    std::function<double(std::size_t)> score;
    const bool identical = std::all_of(transforms.begin(), transforms.end(),
                                       [&](const UtilityTransform& f) { return f == transforms[0]; });
    if (identical) {
        report.case_name = "identical_transforms";
        score = [&](std::size_t z) {
            double m = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < n; ++i) m = std::min(m, space.anticipated_utility(z, i));
            return m;
        };
    } else {
        for (std::size_t hat = 0; hat < n && report.case_name.empty(); ++hat) {
            const double top = transforms[hat](report.utility_ranges[hat].second);
            bool dominated = true;
            for (std::size_t j = 0; j < n; ++j) {
                if (j != hat && top > transforms[j](report.utility_ranges[j].first)) dominated = false;
            }
            if (dominated) {
                report.case_name = "dominated_player";
                report.dominated_player = hat;
                score = [&space, hat](std::size_t z) { return space.anticipated_utility(z, hat); };
            }
        }
        if (report.case_name.empty()) {
            report.case_name = "general";
            score = [&](std::size_t z) { return node_value(space, transforms, z); };
        }
    }

    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t z : graph.nodes) best = std::max(best, score(z));
    for (std::size_t z : graph.nodes) {
        if (within_tie(score(z), best)) report.target.push_back(z);
    }
    report.matches_stable_set = report.target == stable.members;
    return report;
}

SlopeCheck perturbation_slope_check(const StateSpace& space, const ConsistencyTable& consistency,
                                    const ChainParameters& params, std::size_t from, std::size_t to,
                                    std::span<const double> xi_grid) {
    if (xi_grid.size() < 2) throw std::invalid_argument("slope fit needs at least two xi values");
    SlopeCheck out;
    out.from = from;
    out.to = to;
    out.target = edge_resistance(space, consistency, params.transforms, from, to);
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (double xi : xi_grid) {
        const double p = idealized_entry(space, consistency, params, from, to, xi);
        if (!(p > 0.0)) {
            std::ostringstream msg;
            msg << "transition " << from << " -> " << to << " has zero probability at xi = " << xi;
            throw std::domain_error(msg.str());
        }
        const double x = std::log(xi), y = std::log(p);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double m = static_cast<double>(xi_grid.size());
    out.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    out.relative_error = std::abs(out.slope - out.target) / std::max(std::abs(out.target), 1e-12);
    return out;
}

std::vector<SlopeCheck> perturbation_slope_check(const StateSpace& space, const ConsistencyTable& consistency,
                                                 const ChainParameters& params,
                                                 std::span<const std::pair<std::size_t, std::size_t>> entries,
                                                 std::span<const double> xi_grid) {
    std::vector<SlopeCheck> out;
    out.reserve(entries.size());
    for (const auto& [from, to] : entries) {
        out.push_back(perturbation_slope_check(space, consistency, params, from, to, xi_grid));
    }
    return out;
}

std::vector<std::pair<std::size_t, std::size_t>> positive_resistance_entries(
    const StateSpace& space, const ConsistencyTable& consistency, std::span<const UtilityTransform> transforms,
    std::size_t limit) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t z : consistency.consistent_states()) {
        for (std::size_t w = 0; w < space.size() && out.size() < limit; ++w) {
            if (w != z && edge_resistance(space, consistency, transforms, z, w) > 0.0) out.emplace_back(z, w);
        }
        if (out.size() >= limit) break;
    }
    return out;
}

void check_exploration_exponents(const StateSpace& space, std::span<const UtilityTransform> transforms) {
    for (std::size_t i = 0; i < space.player_count(); ++i) {
        const auto& info = space.player(i);
        for (std::size_t b = 0; b < info.anticipated.size(); ++b) {
            const double e = transforms[i](info.anticipated[b]);
            if (!(e > 0.0)) {
                std::ostringstream msg;
                msg << "exploration exponent f_" << i << "(U) = " << e << " is not positive at belief " << b
                    << " of player " << i;
                throw std::domain_error(msg.str());
            }
        }
    }
}

}  // namespace eht
