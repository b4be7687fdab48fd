#pragma once

// Reference algorithms used to judge the distributed scheme: a fusion-center
// run of the same surrogate updates, and a simplified adapt-then-combine
// diffusion stand-in without gradient tracking.

#include "d2l/protocol.hpp"

namespace d2l {

/// Same per-round surrogate math as Simulation with a single agent, the
/// identity mixing matrix and a zero estimate of the other agents'
/// gradients. Multi-block problems are pooled into one block first.
class CentralizedOracle {
public:
    CentralizedOracle(const ProblemData& problem, const RunConfig& config);

    void step();
    MetricsRow observe() const;

    long round() const { return gamma_.round(); }
    const Matrix& dictionary() const { return D_; }
    const Matrix& codes() const { return X_; }

private:
    ProblemData pooled_;
    Schedules sched_;
    GammaSchedule gamma_;
    Matrix D_;
    Matrix X_;
    int failures_ = 0;
};

MetricsTrace centralized_oracle(const ProblemData& problem, const RunConfig& config);

/// Adapt-then-combine stand-in. Each round: projected gradient step on the
/// local copy using only the local gradient, blended by gamma; one exchange
/// mixing the copies; then a proximal sparse-coding step (the plain
/// surrogate) against the mixed copy. One message per round.
class DiffusionBaseline {
public:
    DiffusionBaseline(ProblemData problem, const RunConfig& config);

    void step();
    MetricsRow observe() const;

    long round() const { return gamma_.round(); }
    long messages() const { return messages_; }
    const std::vector<Matrix>& dictionaries() const { return D_; }
    const std::vector<Matrix>& codes() const { return X_; }

private:
    ProblemData problem_;
    RunConfig config_;
    GraphSchedule schedule_;
    GammaSchedule gamma_;
    std::vector<Matrix> D_;
    std::vector<Matrix> X_;
    long messages_ = 0;
    int failures_ = 0;
};

MetricsTrace diffusion_baseline(const ProblemData& problem, const RunConfig& config);

}  // namespace d2l
