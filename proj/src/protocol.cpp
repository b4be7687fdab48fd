#include "d2l/protocol.hpp"

#include <utility>

namespace d2l {

void RunConfig::validate() const
{
    sched.validate();
    if (max_rounds < 0) throw InstanceError("max_rounds must be non-negative");
    if (!(stop_tol >= 0.0)) throw InstanceError("stop_tol must be non-negative");
    if (metric_stride < 1) throw InstanceError("metric_stride must be at least 1");
}

std::vector<Matrix> consensus_step(const Matrix& W, const std::vector<Matrix>& U)
{
    const auto n = static_cast<Index>(U.size());
    if (W.rows() != n || W.cols() != n) throw InstanceError("weight matrix does not match agent count");
    std::vector<Matrix> out;
    out.reserve(U.size());
    for (Index i = 0; i < n; ++i) {
        Matrix acc = Matrix::Zero(U.front().rows(), U.front().cols());
        for (Index j = 0; j < n; ++j)
            if (W(i, j) != 0.0) acc += W(i, j) * U[j];
        out.push_back(std::move(acc));
    }
    return out;
}

std::vector<Matrix> tracking_step(const Matrix& W, const std::vector<Matrix>& theta,
                                  const std::vector<Matrix>& grad_new, const std::vector<Matrix>& grad_old)
{
    if (grad_new.size() != theta.size() || grad_old.size() != theta.size())
        throw InstanceError("one gradient pair per agent expected");
    auto out = consensus_step(W, theta);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += grad_new[i] - grad_old[i];
    return out;
}

namespace {

GraphSchedule schedule_for(const ProblemData& problem, const RunConfig& config)
{
    ScheduleSpec spec = config.graph;
    spec.agents = static_cast<int>(problem.num_agents());
    return build_schedule(spec);
}

}  // namespace

Simulation::Simulation(ProblemData problem, const RunConfig& config)
    : Simulation(problem, config, schedule_for(problem, config))
{
}

Simulation::Simulation(ProblemData problem, const RunConfig& config, GraphSchedule schedule)
    : problem_(std::move(problem)),
      config_(config),
      schedule_(std::move(schedule)),
      gamma_(config.sched.gamma0, config.sched.eps_gamma)
{
    problem_.validate();
    config_.validate();
    if (schedule_.agents() != static_cast<int>(problem_.num_agents()))
        throw InstanceError("graph schedule size does not match the number of agents");
    if (!check_B_strong_connectivity(schedule_, schedule_.window()))
        throw GraphError("schedule is not strongly connected over its window");
    for (int p = 0; p < schedule_.period(); ++p) {
        const auto& w = schedule_.weights(p);
        if (!validate_weights(w.W, schedule_.graph(p), w.theta_min))
            throw GraphError("mixing weights violate the double-stochasticity requirements");
    }
    init_agents();
}

void Simulation::init_agents()
{
    const int n = static_cast<int>(problem_.num_agents());
    agents_.clear();
    agents_.reserve(problem_.num_agents());
    for (std::size_t i = 0; i < problem_.num_agents(); ++i) {
        const Matrix& S = problem_.blocks[i];
        agents_.push_back(
            init_agent(S, initial_dictionary(S, problem_.atoms, problem_.alpha, agent_seed(config_.seed, i)), n));
    }
}

void Simulation::step()
{
    const int n = num_agents();
    const double gamma = gamma_.current();
    const auto& sched = config_.sched;

    // Local updates.
    for (int i = 0; i < n; ++i) {
        AgentState& a = agents_[i];
        const Matrix& S = problem_.blocks[i];
        local_d_step(a, S, gamma, sched, problem_.alpha);
        local_x_step(a, S, tau_x_schedule(a.U, sched.eps_tau), problem_.lambda, problem_.mu, sched);
    }

    // Exchange over the current in-neighbourhoods.
    const Matrix& W = schedule_.weights(round()).W;
    std::vector<Matrix> U(n), theta(n), grad_old(n), grad_new(n);
    for (int i = 0; i < n; ++i) {
        U[i] = agents_[i].U;
        theta[i] = agents_[i].Theta;
        grad_old[i] = agents_[i].grad;
    }
    auto D_next = consensus_step(W, U);
    for (int i = 0; i < n; ++i) grad_new[i] = grad_D_f(D_next[i], agents_[i].X, problem_.blocks[i]);
    auto theta_next = config_.gradient_tracking ? tracking_step(W, theta, grad_new, grad_old)
                                                : consensus_step(W, theta);
    for (int i = 0; i < n; ++i) {
        agents_[i].D = std::move(D_next[i]);
        agents_[i].Theta = std::move(theta_next[i]);
        refresh_pi_tilde(agents_[i], problem_.blocks[i], n);
    }

    messages_ += 2;
    gamma_.advance();
}

std::vector<Matrix> Simulation::dictionaries() const
{
    std::vector<Matrix> out;
    for (const auto& a : agents_) out.push_back(a.D);
    return out;
}

std::vector<Matrix> Simulation::codes() const
{
    std::vector<Matrix> out;
    for (const auto& a : agents_) out.push_back(a.X);
    return out;
}

Matrix Simulation::mean_dictionary() const
{
    return average_dictionary(dictionaries());
}

int Simulation::inner_failures() const
{
    int total = 0;
    for (const auto& a : agents_) total += a.inner_failures;
    return total;
}

MetricsRow Simulation::observe() const
{
    const auto copies = dictionaries();
    const auto X = codes();
    const Matrix D_bar = average_dictionary(copies);
    MetricsRow row;
    row.nu = round();
    row.messages = messages_;
    row.objective = objective_global(D_bar, X, problem_);
    row.delta = stationarity_gap(D_bar, X, problem_);
    row.cons_err = consensus_error(copies, D_bar);
    row.gamma = gamma();
    row.flags = inner_failures();
    return row;
}

MetricsTrace Simulation::run(const Observer& on_round)
{
    return record_trace<Simulation>(*this, config_, on_round);
}

MetricsTrace run(const ProblemData& problem, const RunConfig& config)
{
    Simulation sim(problem, config);
    return sim.run();
}

}  // namespace d2l
