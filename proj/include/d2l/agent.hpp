#pragma once

// One agent's state and its local computations within a round: the
// dictionary surrogate step with step-size blending, the sparse-coding step,
// and the refresh of the estimate of the other agents' gradient sum.

#include "d2l/dlcore.hpp"

#include <cstdint>
#include <string_view>

namespace d2l {

/// Surrogate used for the sparse-coding step.
enum class XVariant { plain, linearized };
/// Surrogate used for the dictionary step. Both published variants use the
/// linearized form; `plain` solves the full quadratic model.
enum class DMode { linearized, plain };

XVariant parse_variant(std::string_view name);
std::string_view to_string(XVariant v);
DMode parse_d_mode(std::string_view name);
std::string_view to_string(DMode m);

struct Schedules {
    double gamma0 = 0.5;
    double eps_gamma = 0.1;
    double tau_d = 1.0;
    double eps_tau = 1e-6;
    XVariant variant = XVariant::linearized;
    DMode d_mode = DMode::linearized;
    InnerOptions inner{};

    /// gamma0 in [0, 1], eps_gamma in (0, 1/gamma0), tau_d > 0, eps_tau > 0.
    /// gamma0 = 0 is accepted and freezes the dictionaries.
    void validate() const;
};

/// gamma^nu = gamma^{nu-1} (1 - eps gamma^{nu-1}), gamma^0 = gamma0.
class GammaSchedule {
public:
    GammaSchedule(double gamma0, double eps) : value_(gamma0), eps_(eps) {}

    double current() const { return value_; }
    long round() const { return round_; }
    void advance()
    {
        value_ *= 1.0 - eps_ * value_;
        ++round_;
    }

private:
    double value_;
    double eps_;
    long round_ = 0;
};

double gamma_schedule(double gamma0, double eps, long nu);

/// max(eps_tau, sigma_max(U)^2)
double tau_x_schedule(const Matrix& U, double eps_tau);

struct AgentState {
    Matrix D;      // local dictionary copy
    Matrix X;      // private codes
    Matrix Theta;  // tracker of the network-average dictionary gradient
    Matrix Pi;     // estimate of the other agents' gradient sum
    Matrix U;      // blended dictionary of the current round
    Matrix grad;   // grad_D f_i at (D, X)
    int inner_failures = 0;
};

/// Mixes a base seed with an agent index into an independent stream seed.
std::uint64_t agent_seed(std::uint64_t seed, std::size_t agent);

/// K columns drawn from the local data (without replacement when possible)
/// and rescaled to norm alpha. Zero columns stay zero.
Matrix initial_dictionary(const Matrix& S, Index atoms, double alpha, std::uint64_t seed);

/// X = 0, Theta = grad_D f_i(D0, 0), Pi = I * Theta - grad.
AgentState init_agent(const Matrix& S, Matrix D0, int num_agents);

/// Dictionary surrogate step followed by U = D + gamma (D_tilde - D).
const Matrix& local_d_step(AgentState& state, const Matrix& S, double gamma, const Schedules& sched, double alpha);

/// Sparse-coding step with dictionary U, centered at the current codes.
const Matrix& local_x_step(AgentState& state, const Matrix& S, double tau_x, double lambda, double mu,
                           const Schedules& sched);

/// Recomputes grad at (D, X) and sets Pi = I * Theta - grad.
const Matrix& refresh_pi_tilde(AgentState& state, const Matrix& S, int num_agents);

}  // namespace d2l
