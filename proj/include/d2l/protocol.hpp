#pragma once

// Synchronous round orchestration: local surrogate steps on every agent,
// then the neighbourhood exchange that mixes the blended dictionaries and
// the gradient trackers. Message accounting and the metrics observer live
// here as well.

#include "d2l/agent.hpp"
#include "d2l/dlcore.hpp"
#include "d2l/merit.hpp"
#include "d2l/netgraph.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace d2l {

struct RunConfig {
    Schedules sched{};
    ScheduleSpec graph{};  // `agents` is taken from the problem
    long max_rounds = 500;
    double stop_tol = 0.0;  // stop once delta <= stop_tol at a recorded round
    long metric_stride = 1;
    std::uint64_t seed = 1;
    bool gradient_tracking = true;  // false drops the gradient-difference correction

    void validate() const;
};

/// D_i <- sum_j w_ij U_j
std::vector<Matrix> consensus_step(const Matrix& W, const std::vector<Matrix>& U);

/// Theta_i <- sum_j w_ij Theta_j + grad_new_i - grad_old_i
std::vector<Matrix> tracking_step(const Matrix& W, const std::vector<Matrix>& theta,
                                  const std::vector<Matrix>& grad_new, const std::vector<Matrix>& grad_old);

class Simulation {
public:
    /// Builds the graph schedule from `config.graph` with one agent per block.
    Simulation(ProblemData problem, const RunConfig& config);
    Simulation(ProblemData problem, const RunConfig& config, GraphSchedule schedule);

    /// One full round: local steps on every agent, then mixing and tracking.
    void step();

    long round() const { return gamma_.round(); }
    long messages() const { return messages_; }
    double gamma() const { return gamma_.current(); }
    int num_agents() const { return static_cast<int>(agents_.size()); }

    const ProblemData& problem() const { return problem_; }
    const GraphSchedule& schedule() const { return schedule_; }
    const std::vector<AgentState>& agents() const { return agents_; }

    std::vector<Matrix> dictionaries() const;
    std::vector<Matrix> codes() const;
    Matrix mean_dictionary() const;
    int inner_failures() const;

    /// Metrics at the current round, computed from a global view of all
    /// agent states. Exchanges no messages.
    MetricsRow observe() const;

    using Observer = std::function<void(const Simulation&)>;

    /// Records the initial row, then steps until max_rounds or until delta
    /// drops to stop_tol. `on_round` sees the state after init and after
    /// every round.
    MetricsTrace run(const Observer& on_round = {});

private:
    void init_agents();

    ProblemData problem_;
    RunConfig config_;
    GraphSchedule schedule_;
    std::vector<AgentState> agents_;
    GammaSchedule gamma_;
    long messages_ = 0;
};

/// Shared recording loop: initial row, then every `stride` rounds and the
/// final round; stops early on delta <= stop_tol.
template <class Algo>
MetricsTrace record_trace(Algo& algo, const RunConfig& config, const std::function<void(const Algo&)>& on_round = {})
{
    MetricsTrace trace;
    if (on_round) on_round(algo);
    trace.rows.push_back(algo.observe());
    if (trace.rows.back().delta <= config.stop_tol) return trace;
    while (algo.round() < config.max_rounds) {
        algo.step();
        if (on_round) on_round(algo);
        if (algo.round() % config.metric_stride == 0 || algo.round() == config.max_rounds) {
            trace.rows.push_back(algo.observe());
            if (trace.rows.back().delta <= config.stop_tol) break;
        }
    }
    return trace;
}

MetricsTrace run(const ProblemData& problem, const RunConfig& config);

}  // namespace d2l
