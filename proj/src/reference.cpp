#include "d2l/reference.hpp"

#include <algorithm>
#include <utility>

namespace d2l {

namespace {

ProblemData pool_blocks(const ProblemData& problem)
{
    problem.validate();
    ProblemData pooled = problem;
    if (problem.num_agents() == 1) return pooled;
    Matrix S(problem.ambient_dim(), problem.total_samples());
    Index col = 0;
    for (const auto& B : problem.blocks) {
        S.middleCols(col, B.cols()) = B;
        col += B.cols();
    }
    pooled.blocks = {std::move(S)};
    return pooled;
}

}  // namespace

CentralizedOracle::CentralizedOracle(const ProblemData& problem, const RunConfig& config)
    : pooled_(pool_blocks(problem)), sched_(config.sched), gamma_(config.sched.gamma0, config.sched.eps_gamma)
{
    config.validate();
    const Matrix& S = pooled_.blocks.front();
    D_ = initial_dictionary(S, pooled_.atoms, pooled_.alpha, agent_seed(config.seed, 0));
    X_ = Matrix::Zero(pooled_.atoms, S.cols());
}

void CentralizedOracle::step()
{
    const Matrix& S = pooled_.blocks.front();
    const double gamma = gamma_.current();
    const Matrix zero = Matrix::Zero(D_.rows(), D_.cols());

    Matrix D_tilde;
    if (sched_.d_mode == DMode::linearized) {
        D_tilde = project_dictionary(D_ - grad_D_f(D_, X_, S) / sched_.tau_d, pooled_.alpha);
    } else {
        auto res = d_update_plain(D_, X_, S, zero, sched_.tau_d, pooled_.alpha, sched_.inner);
        failures_ += res.converged ? 0 : 1;
        D_tilde = std::move(res.value);
    }
    const Matrix U = D_ + gamma * (D_tilde - D_);

    const double su = sigma_max(U).value;
    const double tau_x = std::max(sched_.eps_tau, su * su);
    if (sched_.variant == XVariant::linearized) {
        X_ = x_update_linearized(X_, U, S, tau_x, pooled_.lambda, pooled_.mu);
    } else {
        auto res = x_update_plain(X_, U, S, tau_x, pooled_.lambda, pooled_.mu, sched_.inner);
        failures_ += res.converged ? 0 : 1;
        X_ = std::move(res.value);
    }
    D_ = U;
    gamma_.advance();
}

MetricsRow CentralizedOracle::observe() const
{
    const std::vector<Matrix> codes{X_};
    MetricsRow row;
    row.nu = round();
    row.messages = 0;
    row.objective = objective_global(D_, codes, pooled_);
    row.delta = stationarity_gap(D_, codes, pooled_);
    row.cons_err = 0.0;
    row.gamma = gamma_.current();
    row.flags = failures_;
    return row;
}

MetricsTrace centralized_oracle(const ProblemData& problem, const RunConfig& config)
{
    CentralizedOracle oracle(problem, config);
    return record_trace<CentralizedOracle>(oracle, config);
}

DiffusionBaseline::DiffusionBaseline(ProblemData problem, const RunConfig& config)
    : problem_(std::move(problem)),
      config_(config),
      schedule_([&] {
          ScheduleSpec spec = config.graph;
          spec.agents = static_cast<int>(problem_.num_agents());
          return build_schedule(spec);
      }()),
      gamma_(config.sched.gamma0, config.sched.eps_gamma)
{
    problem_.validate();
    config_.validate();
    for (std::size_t i = 0; i < problem_.num_agents(); ++i) {
        const Matrix& S = problem_.blocks[i];
        D_.push_back(initial_dictionary(S, problem_.atoms, problem_.alpha, agent_seed(config_.seed, i)));
        X_.push_back(Matrix::Zero(problem_.atoms, S.cols()));
    }
}

void DiffusionBaseline::step()
{
    const std::size_t n = D_.size();
    const double gamma = gamma_.current();
    const auto& sched = config_.sched;

    // Adapt: local gradient only.
    std::vector<Matrix> U(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Matrix& S = problem_.blocks[i];
        const Matrix D_tilde = project_dictionary(D_[i] - grad_D_f(D_[i], X_[i], S) / sched.tau_d, problem_.alpha);
        U[i] = D_[i] + gamma * (D_tilde - D_[i]);
    }

    // Combine.
    D_ = consensus_step(schedule_.weights(round()).W, U);

    // Sparse coding against the combined copy.
    for (std::size_t i = 0; i < n; ++i) {
        const double s = sigma_max(D_[i]).value;
        const double tau_x = std::max(sched.eps_tau, s * s);
        auto res = x_update_plain(X_[i], D_[i], problem_.blocks[i], tau_x, problem_.lambda, problem_.mu, sched.inner);
        failures_ += res.converged ? 0 : 1;
        X_[i] = std::move(res.value);
    }

    messages_ += 1;
    gamma_.advance();
}

MetricsRow DiffusionBaseline::observe() const
{
    const Matrix D_bar = average_dictionary(D_);
    MetricsRow row;
    row.nu = round();
    row.messages = messages_;
    row.objective = objective_global(D_bar, X_, problem_);
    row.delta = stationarity_gap(D_bar, X_, problem_);
    row.cons_err = consensus_error(D_, D_bar);
    row.gamma = gamma_.current();
    row.flags = failures_;
    return row;
}

MetricsTrace diffusion_baseline(const ProblemData& problem, const RunConfig& config)
{
    DiffusionBaseline algo(problem, config);
    return record_trace<DiffusionBaseline>(algo, config);
}

}  // namespace d2l
