#include "d2l/netgraph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <random>
#include <set>
#include <utility>

namespace d2l {

namespace {

constexpr double kStochasticTol = 1e-12;

void check_node(int node, int n)
{
    if (node < 0 || node >= n) throw GraphError("node index out of range");
}

std::vector<char> reachable_from(const Digraph& g, int source)
{
    const int n = g.size();
    std::vector<char> seen(n, 0);
    std::deque<int> queue{source};
    seen[source] = 1;
    while (!queue.empty()) {
        const int u = queue.front();
        queue.pop_front();
        for (int v = 0; v < n; ++v) {
            if (!seen[v] && g.receives(v, u)) {
                seen[v] = 1;
                queue.push_back(v);
            }
        }
    }
    return seen;
}

// Undirected ring edges {k, k+1 mod n}, without duplicates for n <= 2.
std::vector<std::pair<int, int>> ring_edges(int n)
{
    std::vector<std::pair<int, int>> edges;
    std::set<std::pair<int, int>> seen;
    for (int k = 0; k < n; ++k) {
        const int a = k;
        const int b = (k + 1) % n;
        if (a == b) continue;
        const auto key = std::minmax(a, b);
        if (seen.insert(key).second) edges.emplace_back(a, b);
    }
    return edges;
}

Digraph random_geometric(int n, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<std::pair<double, double>> pts(n);
    for (auto& p : pts) p = {unit(rng), unit(rng)};

    double radius = std::sqrt(2.0 * std::log(std::max(n, 2)) / std::max(n, 1));
    for (;;) {
        Digraph g(n);
        for (int a = 0; a < n; ++a) {
            for (int b = a + 1; b < n; ++b) {
                if (std::hypot(pts[a].first - pts[b].first, pts[a].second - pts[b].second) <= radius)
                    g.add_undirected(a, b);
            }
        }
        if (g.strongly_connected()) return g;
        radius *= 1.1;
    }
}

}  // namespace

Digraph::Digraph(int nodes) : n_(nodes), in_(static_cast<std::size_t>(nodes) * nodes, 0)
{
    if (nodes < 0) throw GraphError("negative node count");
    for (int i = 0; i < n_; ++i) in_[index(i, i)] = 1;
}

void Digraph::add_link(int from, int to)
{
    check_node(from, n_);
    check_node(to, n_);
    in_[index(to, from)] = 1;
}

void Digraph::add_undirected(int a, int b)
{
    add_link(a, b);
    add_link(b, a);
}

int Digraph::degree(int i) const
{
    int d = 0;
    for (int j = 0; j < n_; ++j)
        if (j != i && receives(i, j)) ++d;
    return d;
}

bool Digraph::is_symmetric() const
{
    for (int i = 0; i < n_; ++i)
        for (int j = i + 1; j < n_; ++j)
            if (receives(i, j) != receives(j, i)) return false;
    return true;
}

bool Digraph::strongly_connected() const
{
    for (int s = 0; s < n_; ++s) {
        const auto seen = reachable_from(*this, s);
        if (std::find(seen.begin(), seen.end(), 0) != seen.end()) return false;
    }
    return true;
}

Digraph& Digraph::merge(const Digraph& other)
{
    if (other.n_ != n_) throw GraphError("cannot merge graphs of different size");
    for (std::size_t k = 0; k < in_.size(); ++k) in_[k] = static_cast<char>(in_[k] | other.in_[k]);
    return *this;
}

ScheduleKind parse_schedule_kind(std::string_view name)
{
    if (name == "static_path") return ScheduleKind::static_path;
    if (name == "static_ring") return ScheduleKind::static_ring;
    if (name == "static_random_geometric") return ScheduleKind::static_random_geometric;
    if (name == "tv_ring_partition") return ScheduleKind::tv_ring_partition;
    if (name == "static_directed_ring") return ScheduleKind::static_directed_ring;
    throw GraphError("unknown graph kind: " + std::string(name));
}

std::string_view to_string(ScheduleKind kind)
{
    switch (kind) {
    case ScheduleKind::static_path: return "static_path";
    case ScheduleKind::static_ring: return "static_ring";
    case ScheduleKind::static_random_geometric: return "static_random_geometric";
    case ScheduleKind::tv_ring_partition: return "tv_ring_partition";
    case ScheduleKind::static_directed_ring: return "static_directed_ring";
    }
    return "unknown";
}

GraphSchedule::GraphSchedule(int agents, int window, std::vector<Digraph> graphs, std::vector<WeightMatrix> weights)
    : agents_(agents), window_(window), graphs_(std::move(graphs)), weights_(std::move(weights))
{
    if (graphs_.empty()) throw GraphError("schedule needs at least one graph");
    if (graphs_.size() != weights_.size()) throw GraphError("one weight matrix per graph expected");
    for (const auto& g : graphs_)
        if (g.size() != agents_) throw GraphError("graph size does not match agent count");
    for (const auto& w : weights_)
        if (w.W.rows() != agents_ || w.W.cols() != agents_) throw GraphError("weight matrix has wrong shape");
}

GraphSchedule build_schedule(const ScheduleSpec& spec)
{
    const int n = spec.agents;
    if (n < 1) throw GraphError("need at least one agent");
    if (spec.window < 1) throw GraphError("connectivity window must be at least 1");

    std::vector<Digraph> graphs;
    std::vector<WeightMatrix> weights;
    auto push_undirected = [&](Digraph g) {
        weights.push_back(metropolis_weights(g, spec.theta_min));
        graphs.push_back(std::move(g));
    };

    switch (spec.kind) {
    case ScheduleKind::static_path: {
        Digraph g(n);
        for (int k = 0; k + 1 < n; ++k) g.add_undirected(k, k + 1);
        push_undirected(std::move(g));
        break;
    }
    case ScheduleKind::static_ring: {
        Digraph g(n);
        for (auto [a, b] : ring_edges(n)) g.add_undirected(a, b);
        push_undirected(std::move(g));
        break;
    }
    case ScheduleKind::static_random_geometric:
        push_undirected(random_geometric(n, spec.seed));
        break;
    case ScheduleKind::tv_ring_partition: {
        const auto edges = ring_edges(n);
        const int P = spec.period;
        if (P < 1) throw GraphError("period must be at least 1");
        if (n > 1 && P > static_cast<int>(edges.size()))
            throw GraphError("ring has fewer edges than phases; some phase would be empty");
        std::vector<Digraph> phases(P, Digraph(n));
        for (std::size_t k = 0; k < edges.size(); ++k)
            phases[k % P].add_undirected(edges[k].first, edges[k].second);
        for (auto& g : phases) push_undirected(std::move(g));
        break;
    }
    case ScheduleKind::static_directed_ring: {
        Digraph g(n);
        std::vector<int> cycle(n);
        std::iota(cycle.begin(), cycle.end(), 0);
        for (int k = 0; k < n && n > 1; ++k) g.add_link(k, (k + 1) % n);
        weights.push_back(n > 1 ? cycle_weights(n, {cycle}, spec.theta_min)
                                : WeightMatrix{Matrix::Identity(1, 1), spec.theta_min});
        graphs.push_back(std::move(g));
        break;
    }
    }

    GraphSchedule schedule(n, spec.window, std::move(graphs), std::move(weights));
    if (!check_B_strong_connectivity(schedule, spec.window))
        throw GraphError("schedule is not strongly connected over the declared window");
    for (int p = 0; p < schedule.period(); ++p) {
        if (!validate_weights(schedule.weights(p).W, schedule.graph(p), spec.theta_min))
            throw GraphError("mixing weights violate the double-stochasticity requirements");
    }
    return schedule;
}

bool check_B_strong_connectivity(const std::vector<Digraph>& graphs, int window)
{
    if (graphs.empty() || window < 1) return false;
    const long P = static_cast<long>(graphs.size());
    // Window starts kB mod P repeat after P / gcd(P, B) windows.
    const long distinct = P / std::gcd(P, static_cast<long>(window));
    for (long k = 0; k < distinct; ++k) {
        Digraph u(graphs.front().size());
        for (long t = k * window; t < (k + 1) * window; ++t) u.merge(graphs[static_cast<std::size_t>(t % P)]);
        if (!u.strongly_connected()) return false;
    }
    return true;
}

bool check_B_strong_connectivity(const GraphSchedule& schedule, int window)
{
    return check_B_strong_connectivity(schedule.graphs(), window);
}

WeightMatrix metropolis_weights(const Digraph& graph, double theta_min)
{
    if (!graph.is_symmetric()) throw GraphError("Metropolis weights need an undirected graph");
    const int n = graph.size();
    std::vector<int> deg(n);
    for (int i = 0; i < n; ++i) deg[i] = graph.degree(i);

    Matrix W = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        double off = 0.0;
        for (int j = 0; j < n; ++j) {
            if (j == i || !graph.receives(i, j)) continue;
            W(i, j) = 1.0 / (1.0 + std::max(deg[i], deg[j]));
            off += W(i, j);
        }
        W(i, i) = 1.0 - off;
    }
    return {W, theta_min};
}

WeightMatrix cycle_weights(int agents, const std::vector<std::vector<int>>& cycles, double theta_min)
{
    std::vector<int> load(agents, 0);
    for (const auto& c : cycles) {
        if (c.size() < 2) throw GraphError("a cycle needs at least two nodes");
        std::set<int> distinct(c.begin(), c.end());
        if (distinct.size() != c.size()) throw GraphError("cycle visits a node twice");
        for (int v : c) {
            check_node(v, agents);
            ++load[v];
        }
    }
    const int max_load = agents > 0 ? *std::max_element(load.begin(), load.end()) : 0;
    const double theta = 1.0 / (1.0 + max_load);

    Matrix W = Matrix::Identity(agents, agents);
    for (const auto& c : cycles) {
        for (std::size_t k = 0; k < c.size(); ++k) {
            const int from = c[k];
            const int to = c[(k + 1) % c.size()];
            W(to, from) += theta;
            W(to, to) -= theta;
        }
    }
    return {W, theta_min};
}

bool validate_weights(const Matrix& W, const Digraph& graph, double theta_min)
{
    const int n = graph.size();
    if (W.rows() != n || W.cols() != n) return false;
    if (!W.allFinite()) return false;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double w = W(i, j);
            if (graph.receives(i, j)) {
                if (w < theta_min || w > 1.0) return false;
            } else if (w != 0.0) {
                return false;
            }
        }
    }
    const Vector ones = Vector::Ones(n);
    const double row_err = (W * ones - ones).cwiseAbs().maxCoeff();
    const double col_err = (W.transpose() * ones - ones).cwiseAbs().maxCoeff();
    return row_err <= kStochasticTol && col_err <= kStochasticTol;
}

}  // namespace d2l
