#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "d2l/protocol.hpp"
#include "d2l/reference.hpp"
#include "d2l/synthetic.hpp"
#include "support.hpp"

using namespace d2l;
using d2l::test::Rand;

namespace {

ProblemData small_problem(int agents, std::uint64_t seed, Index M = 8, Index K = 6, Index N = 20)
{
    SyntheticSpec spec;
    spec.dim = M;
    spec.atoms = K;
    spec.samples = N;
    spec.agents = agents;
    spec.sparsity = 2;
    spec.seed = seed;
    return make_synthetic(spec).second;
}

// Largest deviation between the mean tracker and the mean local gradient.
double tracking_gap(const Simulation& s)
{
    const auto& a = s.agents();
    Matrix theta = Matrix::Zero(a[0].Theta.rows(), a[0].Theta.cols());
    Matrix grad = theta;
    for (std::size_t i = 0; i < a.size(); ++i) {
        theta += a[i].Theta;
        grad += grad_D_f(a[i].D, a[i].X, s.problem().blocks[i]);
    }
    return test::max_abs(theta - grad) / static_cast<double>(a.size());
}

}  // namespace

TEST_CASE("consensus step")
{
    Rand rng(1);
    std::vector<Matrix> U{rng.matrix(3, 2), rng.matrix(3, 2), rng.matrix(3, 2)};
    const auto same = consensus_step(Matrix::Identity(3, 3), U);
    for (int i = 0; i < 3; ++i) CHECK(same[i] == U[i]);

    const std::vector<Matrix> equal(3, U[0]);
    const auto path = build_schedule({ScheduleKind::static_path, 3, 1, 1, 0, 0.01});
    for (const auto& D : consensus_step(path.weights(0).W, equal)) CHECK(test::max_abs(D - U[0]) <= 1e-15);

    const auto avg = consensus_step(Matrix::Constant(2, 2, 0.5), {U[0], U[1]});
    CHECK(test::max_abs(avg[0] - 0.5 * (U[0] + U[1])) <= 1e-15);
    CHECK(avg[0] == avg[1]);

    CHECK_THROWS_AS(consensus_step(Matrix::Identity(2, 2), U), InstanceError);
}

TEST_CASE("tracking step preserves the mean under static gradients")
{
    Rand rng(2);
    const auto s = build_schedule({ScheduleKind::static_ring, 5, 1, 1, 0, 0.01});
    std::vector<Matrix> theta, g;
    Matrix mean = Matrix::Zero(3, 2);
    for (int i = 0; i < 5; ++i) {
        theta.push_back(rng.matrix(3, 2));
        g.push_back(rng.matrix(3, 2));
        mean += theta.back() / 5;
    }
    const auto next = tracking_step(s.weights(0).W, theta, g, g);
    Matrix after = Matrix::Zero(3, 2);
    for (const auto& t : next) after += t / 5;
    CHECK(test::max_abs(after - mean) <= 1e-15);
}

TEST_CASE("single agent tracker equals its gradient")
{
    auto problem = small_problem(1, 3, 4, 3, 5);
    RunConfig cfg;
    Simulation sim(problem, cfg);
    for (int r = 0; r < 20; ++r) {
        sim.step();
        const auto& a = sim.agents()[0];
        CHECK(test::max_abs(a.Theta - grad_D_f(a.D, a.X, problem.blocks[0])) <= 1e-15);
        CHECK(test::max_abs(a.Pi) <= 1e-15);
    }
}

TEST_CASE("tracking mean identity on a 5-agent random run")
{
    for (XVariant v : {XVariant::linearized, XVariant::plain}) {
        RunConfig cfg;
        cfg.sched.variant = v;
        cfg.graph.kind = ScheduleKind::static_random_geometric;
        cfg.graph.seed = 4;
        Simulation sim(small_problem(5, 11), cfg);
        double worst = tracking_gap(sim);
        for (int r = 0; r < 100; ++r) {
            sim.step();
            worst = std::max(worst, tracking_gap(sim));
        }
        CHECK(worst <= 1e-10);
    }
}

TEST_CASE("tracking disabled breaks the identity")
{
    RunConfig cfg;
    cfg.gradient_tracking = false;
    Simulation sim(small_problem(5, 12), cfg);
    double worst = 0.0;
    for (int r = 0; r < 50; ++r) {
        sim.step();
        worst = std::max(worst, tracking_gap(sim));
    }
    CHECK(worst > 1e-3);
}

TEST_CASE("frozen step size keeps the mean dictionary constant")
{
    RunConfig cfg;
    cfg.sched.gamma0 = 0.0;
    Simulation sim(small_problem(5, 13), cfg);
    const Matrix D0 = sim.mean_dictionary();
    const auto X0 = sim.codes();
    for (int r = 0; r < 30; ++r) sim.step();
    CHECK(test::max_abs(sim.mean_dictionary() - D0) <= 1e-13);
    CHECK(test::max_abs(sim.codes()[0] - X0[0]) > 0.0);
}

TEST_CASE("message accounting and stopping")
{
    RunConfig cfg;
    cfg.max_rounds = 30;
    cfg.metric_stride = 7;
    const auto problem = small_problem(3, 15);
    const auto trace = run(problem, cfg);
    CHECK(trace.rows.front().nu == 0);
    CHECK(trace.rows.front().messages == 0);
    CHECK(trace.back().nu == 30);
    CHECK(trace.back().messages == 60);
    std::vector<long> rounds;
    for (const auto& r : trace.rows) rounds.push_back(r.nu);
    CHECK(rounds == std::vector<long>{0, 7, 14, 21, 28, 30});

    cfg.max_rounds = 0;
    CHECK(run(problem, cfg).rows.size() == 1);

    cfg.max_rounds = 500;
    cfg.metric_stride = 1;
    cfg.stop_tol = 0.05;
    const auto early = run(problem, cfg);
    CHECK(early.back().delta <= 0.05);
    CHECK(early.back().nu < 500);
}

TEST_CASE("single agent run matches the centralized oracle")
{
    for (XVariant v : {XVariant::linearized, XVariant::plain}) {
        RunConfig cfg;
        cfg.sched.variant = v;
        const auto problem = small_problem(1, 16, 4, 3, 5);
        Simulation sim(problem, cfg);
        CentralizedOracle oracle(problem, cfg);
        for (int r = 0; r < 100; ++r) {
            sim.step();
            oracle.step();
            CHECK(test::max_abs(sim.agents()[0].D - oracle.dictionary()) <= 1e-12);
            CHECK(test::max_abs(sim.agents()[0].X - oracle.codes()) <= 1e-12);
        }
    }
}

TEST_CASE("invalid configuration is rejected")
{
    const auto problem = small_problem(3, 17);
    RunConfig cfg;
    cfg.metric_stride = 0;
    CHECK_THROWS_AS(Simulation(problem, cfg), InstanceError);
    cfg.metric_stride = 1;
    cfg.max_rounds = -1;
    CHECK_THROWS_AS(Simulation(problem, cfg), InstanceError);

    // Schedule that is not connected over its window.
    Digraph split(3);
    split.add_undirected(0, 1);
    GraphSchedule bad(3, 1, {split}, {metropolis_weights(split)});
    CHECK_THROWS_AS(Simulation(problem, RunConfig{}, bad), GraphError);
}

TEST_CASE("local copies stay feasible")
{
    RunConfig cfg;
    cfg.graph.kind = ScheduleKind::tv_ring_partition;
    cfg.graph.period = cfg.graph.window = 2;
    Simulation sim(small_problem(5, 18), cfg);
    for (int r = 0; r < 50; ++r) {
        sim.step();
        for (const auto& a : sim.agents()) {
            CHECK(a.D.colwise().norm().maxCoeff() <= 1.0 + 1e-12);
            CHECK(a.U.colwise().norm().maxCoeff() <= 1.0 + 1e-12);
        }
    }
}
