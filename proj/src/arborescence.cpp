#include "eht/arborescence.hpp"

#include <limits>
#include <stdexcept>
#include <vector>

namespace eht {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_input(std::span<const double> weights, std::size_t node_count, std::size_t root) {
    if (weights.size() != node_count * node_count) throw std::invalid_argument("weight matrix is not square");
    if (root >= node_count) throw std::out_of_range("tree root out of range");
}

struct TreeSearch {
    std::span<const double> w;
    std::size_t k;
    std::size_t root;
    std::vector<std::size_t> parent;  // k marks "not assigned yet"
    double best = kInf;

    bool closes_cycle(std::size_t u, std::size_t p) const {
        for (std::size_t x = p, steps = 0; x != root && steps <= k; ++steps) {
            if (x == u) return true;
            if (parent[x] == k) return false;
            x = parent[x];
        }
        return false;
    }

    // Assigns parents in ascending node order so the partial sum accumulates
    // in the same order as a plain loop over nodes.
    void visit(std::size_t u, double partial) {
        if (u == k) {
            if (partial < best) best = partial;
            return;
        }
        if (u == root) {
            visit(u + 1, partial);
            return;
        }
        for (std::size_t p = 0; p < k; ++p) {
            if (p == u) continue;
            const double next = partial + w[u * k + p];
            if (!(next < best)) continue;
            if (closes_cycle(u, p)) continue;
            parent[u] = p;
            visit(u + 1, next);
            parent[u] = k;
        }
    }
};

}  // namespace

double min_in_tree_bruteforce(std::span<const double> weights, std::size_t node_count, std::size_t root) {
    check_input(weights, node_count, root);
    if (node_count == 1) return 0.0;
    TreeSearch search{weights, node_count, root, std::vector<std::size_t>(node_count, node_count)};
    search.visit(0, 0.0);
    return search.best;
}

double min_in_tree_edmonds(std::span<const double> weights, std::size_t node_count, std::size_t root) {
    check_input(weights, node_count, root);
    struct Edge {
        std::size_t from, to;
        double w;
    };
    // Reverse every edge: the in-tree u -> parent becomes the out-arborescence parent -> u.
    std::vector<Edge> edges;
    edges.reserve(node_count * node_count);
    for (std::size_t u = 0; u < node_count; ++u) {
        for (std::size_t p = 0; p < node_count; ++p) {
            if (u != p && weights[u * node_count + p] < kInf) edges.push_back({p, u, weights[u * node_count + p]});
        }
    }

    constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
    std::size_t n = node_count;
    double total = 0.0;
    std::vector<double> in;
    std::vector<std::size_t> pre, id, mark;
    while (true) {
        in.assign(n, kInf);
        pre.assign(n, kNone);
        for (const auto& e : edges) {
            if (e.from != e.to && e.w < in[e.to]) {
                in[e.to] = e.w;
                pre[e.to] = e.from;
            }
        }
        for (std::size_t v = 0; v < n; ++v) {
            if (v != root && in[v] == kInf) throw std::domain_error("no spanning in-tree reaches the root");
        }
        std::size_t clusters = 0;
        id.assign(n, kNone);
        mark.assign(n, kNone);
        in[root] = 0.0;
        for (std::size_t v = 0; v < n; ++v) {
            total += in[v];
            std::size_t u = v;
            while (mark[u] != v && id[u] == kNone && u != root) {
                mark[u] = v;
                u = pre[u];
            }
            if (u != root && id[u] == kNone) {
                for (std::size_t x = pre[u]; x != u; x = pre[x]) id[x] = clusters;
                id[u] = clusters++;
            }
        }
        if (clusters == 0) break;
        for (std::size_t v = 0; v < n; ++v) {
            if (id[v] == kNone) id[v] = clusters++;
        }
        for (auto& e : edges) {
            const std::size_t head = e.to;
            e.from = id[e.from];
            e.to = id[e.to];
            if (e.from != e.to) e.w -= in[head];
        }
        n = clusters;
        root = id[root];
    }
    return total;
}

}  // namespace eht
