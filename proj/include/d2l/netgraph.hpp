#pragma once

// Communication graphs, periodic time-varying schedules, connectivity checks
// over windows of consecutive rounds, and doubly stochastic mixing weights.

#include "d2l/dlcore.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace d2l {

class GraphError : public std::invalid_argument {
public:
    explicit GraphError(const std::string& what) : std::invalid_argument(what) {}
};

/// Directed graph stored as in-neighbourhoods. Every node always has a
/// self-loop, so `receives(i, i)` is true for all i.
class Digraph {
public:
    explicit Digraph(int nodes = 0);

    int size() const { return n_; }

    /// Adds the link `from -> to`: agent `to` can receive from agent `from`.
    void add_link(int from, int to);
    void add_undirected(int a, int b);

    /// True iff j is in the in-neighbourhood of i (j can send to i).
    bool receives(int i, int j) const { return in_[index(i, j)] != 0; }

    /// Number of neighbours excluding the self-loop (symmetric graphs).
    int degree(int i) const;
    bool is_symmetric() const;
    bool strongly_connected() const;

    Digraph& merge(const Digraph& other);

    friend bool operator==(const Digraph&, const Digraph&) = default;

private:
    std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) * n_ + j; }

    int n_ = 0;
    std::vector<char> in_;
};

/// Mixing weights of one round; `theta_min` is the lower bound required on
/// every nonzero entry.
struct WeightMatrix {
    Matrix W;
    double theta_min = 0.01;
};

enum class ScheduleKind {
    static_path,
    static_ring,
    static_random_geometric,
    tv_ring_partition,
    static_directed_ring,
};

ScheduleKind parse_schedule_kind(std::string_view name);
std::string_view to_string(ScheduleKind kind);

struct ScheduleSpec {
    ScheduleKind kind = ScheduleKind::static_ring;
    int agents = 1;
    int window = 1;  // B
    int period = 1;  // number of phases, tv_ring_partition only
    std::uint64_t seed = 0;
    double theta_min = 0.01;
};

/// Periodic graph sequence; round nu uses phase nu mod period. Each phase
/// carries the mixing weights that go with its graph.
class GraphSchedule {
public:
    GraphSchedule(int agents, int window, std::vector<Digraph> graphs, std::vector<WeightMatrix> weights);

    int agents() const { return agents_; }
    int window() const { return window_; }
    int period() const { return static_cast<int>(graphs_.size()); }

    const Digraph& graph(long round) const { return graphs_[phase(round)]; }
    const WeightMatrix& weights(long round) const { return weights_[phase(round)]; }
    const std::vector<Digraph>& graphs() const { return graphs_; }
    const std::vector<WeightMatrix>& all_weights() const { return weights_; }

private:
    std::size_t phase(long round) const { return static_cast<std::size_t>(round % period()); }

    int agents_;
    int window_;
    std::vector<Digraph> graphs_;
    std::vector<WeightMatrix> weights_;
};

/// Builds a schedule satisfying the windowed strong-connectivity condition
/// by construction. Throws GraphError when the parameters cannot satisfy it.
GraphSchedule build_schedule(const ScheduleSpec& spec);

/// True iff the union of the graphs in every window [kB, (k+1)B - 1] is
/// strongly connected. Checked over one full cycle of window offsets.
bool check_B_strong_connectivity(const GraphSchedule& schedule, int window);
bool check_B_strong_connectivity(const std::vector<Digraph>& graphs, int window);

/// Metropolis rule on an undirected snapshot:
/// w_ij = 1 / (1 + max(deg_i, deg_j)) for neighbours, w_ii = 1 - sum_j w_ij.
WeightMatrix metropolis_weights(const Digraph& graph, double theta_min = 0.01);

/// Convex combination of identity and permutation matrices for a graph that
/// is a union of directed cycles. Each cycle lists its nodes in send order
/// (node c[k] sends to c[k+1], the last sends to the first).
WeightMatrix cycle_weights(int agents, const std::vector<std::vector<int>>& cycles, double theta_min = 0.01);

/// Pattern matches the graph's in-neighbourhoods, nonzeros are at least
/// theta_min, and rows and columns sum to one within 1e-12.
bool validate_weights(const Matrix& W, const Digraph& graph, double theta_min);

}  // namespace d2l
