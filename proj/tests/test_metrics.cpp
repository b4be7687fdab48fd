#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "d2l/merit.hpp"
#include "d2l/reference.hpp"
#include "d2l/synthetic.hpp"
#include "support.hpp"

#include <cmath>
#include <limits>
#include <sstream>

using namespace d2l;
using d2l::test::Rand;

namespace {

ProblemData random_problem(Rand& rng, int agents, Index M, Index K, Index n, double alpha = 1.0)
{
    ProblemData p;
    for (int i = 0; i < agents; ++i) p.blocks.push_back(rng.matrix(M, n));
    p.atoms = K;
    p.lambda = 0.1;
    p.mu = 0.05;
    p.alpha = alpha;
    return p;
}

// Dictionary half of the gap: argmin over the ball set of
// sum_i <g_i, D - Dbar> + 1/2 ||D - Dbar||^2, found by projected gradient.
Matrix d_hat_oracle(const Matrix& Dbar, const Matrix& gsum, double agents, double alpha)
{
    Matrix Z = Dbar;
    for (int it = 0; it < 200000; ++it) {
        const Matrix next = project_dictionary(Z - 0.25 / agents * (gsum + agents * (Z - Dbar)), alpha);
        const double change = test::max_abs(next - Z);
        Z = next;
        if (change <= 1e-15) break;
    }
    return Z;
}

// Code half, entrywise: argmin g (x - x0) + 1/2 (x - x0)^2 + lambda|x| + mu x^2.
double x_hat_oracle(double g, double x0, double lambda, double mu)
{
    return test::grid_argmin(
        [&](double x) { return g * (x - x0) + 0.5 * (x - x0) * (x - x0) + lambda * std::abs(x) + mu * x * x; },
        -50, 50);
}

double gap_oracle(const Matrix& Dbar, const std::vector<Matrix>& X, const ProblemData& p)
{
    Matrix gsum = Matrix::Zero(Dbar.rows(), Dbar.cols());
    for (std::size_t i = 0; i < X.size(); ++i) gsum += grad_D_f(Dbar, X[i], p.blocks[i]);
    double gap = test::max_abs(Dbar - d_hat_oracle(Dbar, gsum, static_cast<double>(X.size()), p.alpha));
    for (std::size_t i = 0; i < X.size(); ++i) {
        const Matrix g = grad_X_f(Dbar, X[i], p.blocks[i]);
        for (Index k = 0; k < X[i].size(); ++k)
            gap = std::max(gap, std::abs(X[i](k) - x_hat_oracle(g(k), X[i](k), p.lambda, p.mu)));
    }
    return gap;
}

}  // namespace

TEST_CASE("stationarity gap vanishes at zero")
{
    ProblemData p;
    p.blocks = {Matrix::Zero(3, 4), Matrix::Zero(3, 2)};
    p.atoms = 2;
    p.lambda = 0.1;
    p.mu = 0.05;
    CHECK(stationarity_gap(Matrix::Zero(3, 2), {Matrix::Zero(2, 4), Matrix::Zero(2, 2)}, p) == 0.0);
}

TEST_CASE("stationarity gap matches brute-force surrogate minimization")
{
    Rand rng(1);
    for (int t = 0; t < 10; ++t) {
        const auto p = random_problem(rng, 3, 4, 3, 5);
        const Matrix Dbar = project_dictionary(rng.matrix(4, 3, -2, 2), 1.0);
        std::vector<Matrix> X;
        for (int i = 0; i < 3; ++i) X.push_back(rng.matrix(3, 5));
        CHECK(std::abs(stationarity_gap(Dbar, X, p) - gap_oracle(Dbar, X, p)) <= 1e-6);
    }
}

TEST_CASE("stationarity gap is zero at a KKT point")
{
    // D = I on the unit sphere, diagonal positive codes, data built so that
    // the code conditions hold with equality.
    const double lambda = 0.1, mu = 0.05;
    const Vector x = (Vector(2) << 0.7, 1.3).finished();
    const Matrix D = Matrix::Identity(2, 2);
    Matrix X = Matrix::Zero(2, 2);
    X.diagonal() = x;
    Matrix E = Matrix::Zero(2, 2);
    for (int k = 0; k < 2; ++k) E(k, k) = lambda + 2 * mu * x(k);
    ProblemData p;
    p.blocks = {D * X + E};
    p.atoms = 2;
    p.lambda = lambda;
    p.mu = mu;
    p.alpha = 1.0;

    // Code conditions: gradient plus subgradient contains zero.
    const Matrix gX = grad_X_f(D, X, p.blocks[0]) + 2 * mu * X;
    for (Index k = 0; k < X.size(); ++k) {
        if (X(k) != 0.0)
            CHECK(std::abs(gX(k) + lambda) <= 1e-14);
        else
            CHECK(std::abs(gX(k)) <= lambda);
    }
    // Dictionary conditions: each gradient column is a nonpositive multiple
    // of its active column.
    const Matrix gD = grad_D_f(D, X, p.blocks[0]);
    for (Index k = 0; k < 2; ++k) {
        const double nu = -gD.col(k).dot(D.col(k));
        CHECK(nu >= 0.0);
        CHECK(test::max_abs(gD.col(k) + nu * D.col(k)) <= 1e-14);
    }
    CHECK(stationarity_gap(D, {X}, p) <= 1e-15);

    // Large l1 weight makes zero codes stationary for any feasible D.
    Rand rng(2);
    ProblemData q = random_problem(rng, 2, 3, 2, 4);
    const Matrix Dq = project_dictionary(rng.matrix(3, 2), 1.0);
    q.lambda = 100.0;
    CHECK(stationarity_gap(Dq, {Matrix::Zero(2, 4), Matrix::Zero(2, 4)}, q) == 0.0);
}

TEST_CASE("stationarity gap is Lipschitz on sampled points")
{
    Rand rng(3);
    for (int t = 0; t < 20; ++t) {
        const auto p = random_problem(rng, 2, 4, 3, 5);
        const Matrix D = project_dictionary(rng.matrix(4, 3), 1.0);
        const std::vector<Matrix> X{rng.matrix(3, 5), rng.matrix(3, 5)};
        const double base = stationarity_gap(D, X, p);
        for (double eta : {1e-3, 1e-5, 1e-7}) {
            const Matrix Dp = D + eta * rng.matrix(4, 3);
            const std::vector<Matrix> Xp{X[0] + eta * rng.matrix(3, 5), X[1] + eta * rng.matrix(3, 5)};
            CHECK(std::abs(stationarity_gap(Dp, Xp, p) - base) <= 1e3 * eta);
        }
    }
}

TEST_CASE("consensus error")
{
    Rand rng(4);
    const Matrix A = rng.matrix(3, 4);
    CHECK(consensus_error({A, A, A}, average_dictionary({A, A, A})) == 0.0);

    Matrix B = A;
    B(1, 2) += 0.25;
    CHECK(consensus_error({A, B}, average_dictionary({A, B})) == doctest::Approx(0.125).epsilon(1e-14));

    const std::vector<Matrix> C{rng.matrix(3, 4), rng.matrix(3, 4), rng.matrix(3, 4)};
    Matrix mean = Matrix::Zero(3, 4);
    for (Index r = 0; r < 3; ++r)
        for (Index c = 0; c < 4; ++c) mean(r, c) = (C[0](r, c) + C[1](r, c) + C[2](r, c)) / 3.0;
    double loop = 0.0;
    for (const auto& M : C)
        for (Index r = 0; r < 3; ++r)
            for (Index c = 0; c < 4; ++c) loop = std::max(loop, std::abs(M(r, c) - mean(r, c)));
    CHECK(std::abs(consensus_error(C, mean) - loop) <= 1e-15);
}

TEST_CASE("consensus error is zero exactly when copies agree")
{
    Rand rng(5);
    const Matrix A = rng.matrix(4, 3);
    for (int t = 0; t < 50; ++t) {
        Matrix B = A;
        B(t % B.size()) = std::nextafter(B(t % B.size()), 10.0);
        const std::vector<Matrix> copies{A, B, A};
        CHECK(consensus_error(copies, average_dictionary(copies)) > 0.0);
    }
}

TEST_CASE("psnr and mse")
{
    const std::vector<double> a(100, 100.0);
    std::vector<double> b = a;
    auto same = psnr_mse(a, b);
    CHECK(same.mse == 0.0);
    CHECK(std::isinf(same.psnr_db));

    for (auto& v : b) v += 16.0;
    const auto q = psnr_mse(a, b);
    CHECK(q.mse == 256.0);
    CHECK(q.psnr_db == doctest::Approx(10.0 * std::log10(255.0 * 255.0 / 256.0)));
    CHECK(q.psnr_db == doctest::Approx(24.05).epsilon(1e-3));

    // Growing perturbations give strictly lower scores.
    double prev = std::numeric_limits<double>::infinity();
    for (double amp = 0.5; amp < 60.0; amp *= 1.5) {
        std::vector<double> c = a;
        for (std::size_t k = 0; k < c.size(); ++k) c[k] += (k % 2 ? amp : -amp);
        const auto r = psnr_mse(a, c);
        CHECK(r.psnr_db < prev);
        prev = r.psnr_db;
    }

    CHECK_THROWS_AS(psnr_mse(a, std::vector<double>(3, 0.0)), InstanceError);
}

TEST_CASE("csv form")
{
    MetricsTrace t;
    t.rows.push_back({0, 0, 1.5, 0.1, 0.25, 0.5, 0});
    t.rows.push_back({10, 20, 1.0 / 3.0, 1e-20, 0.0, 0.475, 0});
    const std::string csv = to_csv(t);
    CHECK(csv ==
          "nu,messages,objective,delta,cons_err,gamma\n"
          "0,0,1.5,0.1,0.25,0.5\n"
          "10,20,0.3333333333333333,1e-20,0,0.475\n");
    // Every number reads back to the same double.
    CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
    CHECK(std::stod(format_number(0.1 + 0.2)) == 0.1 + 0.2);

    std::ostringstream merged;
    write_merged_csv(merged, {{"a", t}, {"b", t}});
    const std::string m = merged.str();
    CHECK(m.rfind("algorithm,nu,messages,objective,delta,cons_err,gamma\n", 0) == 0);
    CHECK(m.find("\nb,10,20,") != std::string::npos);
}

TEST_CASE("trace lookups")
{
    MetricsTrace t;
    for (long k = 0; k <= 5; ++k) t.rows.push_back({k * 10, k * 20, 0, static_cast<double>(k), 0, 0, 0});
    CHECK(t.at_or_before(25).nu == 20);
    CHECK(t.at_or_before(50).nu == 50);
    CHECK(t.at_message_budget(39).messages == 20);
    CHECK(t.at_message_budget(1000).messages == 100);
}

TEST_CASE("centralized oracle: zero instance stays at zero")
{
    ProblemData p;
    p.blocks = {Matrix::Zero(4, 5)};
    p.atoms = 3;
    p.lambda = 0.1;
    p.mu = 0.05;
    CentralizedOracle o(p, RunConfig{});
    for (int r = 0; r < 10; ++r) {
        o.step();
        CHECK(o.dictionary().isZero(0.0));
        CHECK(o.codes().isZero(0.0));
    }
}

TEST_CASE("centralized oracle: objective does not increase at small steps")
{
    SyntheticSpec spec;
    spec.dim = 6;
    spec.atoms = 4;
    spec.samples = 30;
    spec.agents = 1;
    spec.sparsity = 2;
    for (XVariant v : {XVariant::linearized, XVariant::plain})
        for (std::uint64_t seed = 1; seed <= 3; ++seed) {
            spec.seed = seed;
            RunConfig cfg;
            cfg.sched.gamma0 = 0.1;
            cfg.sched.variant = v;
            cfg.max_rounds = 200;
            const auto trace = centralized_oracle(make_synthetic(spec).second, cfg);
            for (std::size_t k = 1; k < trace.rows.size(); ++k)
                CHECK(trace.rows[k].objective <= trace.rows[k - 1].objective + 1e-12);
        }
}

TEST_CASE("diffusion baseline: single agent is projected alternating descent")
{
    Rand rng(6);
    SyntheticSpec spec;
    spec.dim = 5;
    spec.atoms = 4;
    spec.samples = 12;
    spec.agents = 1;
    spec.sparsity = 2;
    const auto problem = make_synthetic(spec).second;
    RunConfig cfg;
    DiffusionBaseline base(problem, cfg);
    Matrix D = base.dictionaries()[0];
    Matrix X = base.codes()[0];
    const Matrix& S = problem.blocks[0];
    GammaSchedule gamma(cfg.sched.gamma0, cfg.sched.eps_gamma);
    for (int r = 0; r < 50; ++r) {
        const Matrix step = project_dictionary(D - grad_D_f(D, X, S) / cfg.sched.tau_d, problem.alpha);
        D = D + gamma.current() * (step - D);
        const double s = Eigen::JacobiSVD<Matrix>(D).singularValues()(0);
        X = x_update_plain(X, D, S, std::max(cfg.sched.eps_tau, s * s), problem.lambda, problem.mu,
                           cfg.sched.inner)
                .value;
        gamma.advance();
        base.step();
        CHECK(test::max_abs(base.dictionaries()[0] - D) <= 1e-12);
        CHECK(test::max_abs(base.codes()[0] - X) <= 1e-9);
        CHECK(base.messages() == r + 1);
    }
}
