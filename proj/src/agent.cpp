#include "d2l/agent.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <string>
#include <vector>

namespace d2l {

XVariant parse_variant(std::string_view name)
{
    if (name == "plain") return XVariant::plain;
    if (name == "linearized") return XVariant::linearized;
    throw InstanceError("unknown variant: " + std::string(name));
}

std::string_view to_string(XVariant v)
{
    return v == XVariant::plain ? "plain" : "linearized";
}

DMode parse_d_mode(std::string_view name)
{
    if (name == "plain") return DMode::plain;
    if (name == "linearized") return DMode::linearized;
    throw InstanceError("unknown dictionary mode: " + std::string(name));
}

std::string_view to_string(DMode m)
{
    return m == DMode::plain ? "plain" : "linearized";
}

void Schedules::validate() const
{
    if (!(gamma0 >= 0.0 && gamma0 <= 1.0)) throw InstanceError("gamma0 must lie in [0, 1]");
    if (!(eps_gamma > 0.0)) throw InstanceError("eps_gamma must be positive");
    if (gamma0 > 0.0 && !(eps_gamma < 1.0 / gamma0)) throw InstanceError("eps_gamma must be below 1/gamma0");
    if (!(tau_d > 0.0)) throw InstanceError("tau_d must be positive");
    if (!(eps_tau > 0.0)) throw InstanceError("eps_tau must be positive");
    if (!(inner.tol > 0.0) || inner.max_iter < 1) throw InstanceError("invalid inner solver options");
}

double gamma_schedule(double gamma0, double eps, long nu)
{
    GammaSchedule g(gamma0, eps);
    for (long k = 0; k < nu; ++k) g.advance();
    return g.current();
}

double tau_x_schedule(const Matrix& U, double eps_tau)
{
    const double s = sigma_max(U).value;
    return std::max(eps_tau, s * s);
}

std::uint64_t agent_seed(std::uint64_t seed, std::size_t agent)
{
    // splitmix64 finalizer
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(agent) + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

Matrix initial_dictionary(const Matrix& S, Index atoms, double alpha, std::uint64_t seed)
{
    if (S.cols() < 1) throw InstanceError("cannot draw dictionary columns from an empty block");
    std::mt19937_64 rng(seed);
    const Index n = S.cols();
    std::vector<Index> picks(static_cast<std::size_t>(atoms));
    if (n >= atoms) {
        std::vector<Index> pool(static_cast<std::size_t>(n));
        std::iota(pool.begin(), pool.end(), Index{0});
        for (Index k = 0; k < atoms; ++k) {
            std::uniform_int_distribution<Index> pick(k, n - 1);
            std::swap(pool[k], pool[pick(rng)]);
            picks[k] = pool[k];
        }
    } else {
        std::uniform_int_distribution<Index> pick(0, n - 1);
        for (auto& p : picks) p = pick(rng);
    }

    Matrix D(S.rows(), atoms);
    for (Index k = 0; k < atoms; ++k) {
        D.col(k) = S.col(picks[k]);
        const double norm = D.col(k).norm();
        if (norm > 0.0) D.col(k) *= alpha / norm;
    }
    return D;
}

AgentState init_agent(const Matrix& S, Matrix D0, int num_agents)
{
    AgentState st;
    st.X = Matrix::Zero(D0.cols(), S.cols());
    st.D = std::move(D0);
    st.grad = grad_D_f(st.D, st.X, S);
    st.Theta = st.grad;
    st.Pi = num_agents * st.Theta - st.grad;
    st.U = st.D;
    return st;
}

const Matrix& local_d_step(AgentState& state, const Matrix& S, double gamma, const Schedules& sched, double alpha)
{
    if (sched.d_mode == DMode::linearized) {
        const Matrix d_tilde =
            d_update_linearized(state.D, grad_D_f(state.D, state.X, S), state.Pi, sched.tau_d, alpha);
        state.U = state.D + gamma * (d_tilde - state.D);
    } else {
        auto res = d_update_plain(state.D, state.X, S, state.Pi, sched.tau_d, alpha, sched.inner);
        if (!res.converged) ++state.inner_failures;
        state.U = state.D + gamma * (res.value - state.D);
    }
    return state.U;
}

const Matrix& local_x_step(AgentState& state, const Matrix& S, double tau_x, double lambda, double mu,
                           const Schedules& sched)
{
    if (sched.variant == XVariant::linearized) {
        state.X = x_update_linearized(state.X, state.U, S, tau_x, lambda, mu);
    } else {
        auto res = x_update_plain(state.X, state.U, S, tau_x, lambda, mu, sched.inner);
        if (!res.converged) ++state.inner_failures;
        state.X = std::move(res.value);
    }
    return state.X;
}

const Matrix& refresh_pi_tilde(AgentState& state, const Matrix& S, int num_agents)
{
    state.grad = grad_D_f(state.D, state.X, S);
    state.Pi = num_agents * state.Theta - state.grad;
    return state.Pi;
}

}  // namespace d2l
