#include "d2l/dlcore.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace d2l {

namespace {

void require(bool ok, const char* what)
{
    if (!ok) throw InstanceError(what);
}

void check_product_shapes(const Matrix& D, const Matrix& X, const Matrix& S)
{
    require(D.cols() == X.rows(), "dictionary columns must match code rows");
    require(D.rows() == S.rows(), "dictionary rows must match data rows");
    require(X.cols() == S.cols(), "code columns must match data columns");
}

double max_abs_diff(const Matrix& A, const Matrix& B)
{
    return A.size() == 0 ? 0.0 : (A - B).cwiseAbs().maxCoeff();
}

// Momentum for accelerated gradient on an m-strongly convex, L-smooth model.
double strong_momentum(double L, double m)
{
    const double sl = std::sqrt(L);
    const double sm = std::sqrt(m);
    return (sl - sm) / (sl + sm);
}

}  // namespace

Index ProblemData::total_samples() const
{
    Index n = 0;
    for (const auto& S : blocks) n += S.cols();
    return n;
}

void ProblemData::validate() const
{
    require(!blocks.empty(), "problem needs at least one agent block");
    const Index M = blocks.front().rows();
    require(M >= 1, "ambient dimension must be positive");
    for (const auto& S : blocks) {
        require(S.rows() == M, "all data blocks must share the same row count");
        require(S.cols() >= 1, "every agent must own at least one sample");
        require(S.allFinite(), "data must be finite");
    }
    require(atoms >= 1, "dictionary size must be positive");
    require(lambda > 0.0, "lambda must be positive");
    require(mu > 0.0, "mu must be positive");
    require(alpha > 0.0, "alpha must be positive");
}

double local_fit(const Matrix& D, const Matrix& X, const Matrix& S)
{
    check_product_shapes(D, X, S);
    return 0.5 * (S - D * X).squaredNorm();
}

double objective_global(const Matrix& D, const std::vector<Matrix>& codes, const ProblemData& problem)
{
    require(codes.size() == problem.blocks.size(), "one code block per agent expected");
    double total = 0.0;
    for (std::size_t i = 0; i < codes.size(); ++i) {
        const Matrix& X = codes[i];
        total += local_fit(D, X, problem.blocks[i]) + problem.lambda * X.cwiseAbs().sum() +
                 problem.mu * X.squaredNorm();
    }
    return total;
}

Matrix grad_D_f(const Matrix& D, const Matrix& X, const Matrix& S)
{
    check_product_shapes(D, X, S);
    return (D * X - S) * X.transpose();
}

Matrix grad_X_f(const Matrix& D, const Matrix& X, const Matrix& S)
{
    check_product_shapes(D, X, S);
    return D.transpose() * (D * X - S);
}

Matrix project_dictionary(const Matrix& D, double alpha)
{
    Matrix out = D;
    if (std::isinf(alpha)) return out;
    for (Index k = 0; k < out.cols(); ++k) {
        const double norm = out.col(k).norm();
        if (norm > alpha) out.col(k) *= alpha / norm;
    }
    return out;
}

Matrix soft_threshold(const Matrix& A, double theta)
{
    return A.unaryExpr([theta](double x) { return soft_threshold(x, theta); });
}

Matrix x_update_linearized(const Matrix& X0, const Matrix& U, const Matrix& S, double tau, double lambda,
                           double mu)
{
    require(tau > 0.0, "tau_X must be positive");
    const Matrix grad = grad_X_f(U, X0, S);
    return (tau / (2.0 * mu + tau)) * soft_threshold(X0 - grad / tau, lambda / tau);
}

InnerResult x_update_plain(const Matrix& X0, const Matrix& U, const Matrix& S, double tau, double lambda,
                           double mu, const InnerOptions& opts)
{
    require(tau > 0.0, "tau_X must be positive");
    require(opts.tol > 0.0, "inner tolerance must be positive");
    check_product_shapes(U, X0, S);

    // Smooth part: 1/2||S - U X||^2 + tau/2||X - X0||^2 + mu||X||^2; prox: lambda||.||_1.
    const Matrix gram = U.transpose() * U;
    const Matrix rhs = U.transpose() * S + tau * X0;
    const double strong = tau + 2.0 * mu;
    const double su = sigma_max(U).value;
    const double L = su * su + strong;
    const double step = 1.0 / L;
    const double beta = strong_momentum(L, strong);

    InnerResult result{X0, 0, false};
    Matrix x = X0;
    Matrix y = X0;
    for (int it = 1; it <= opts.max_iter; ++it) {
        const Matrix grad = gram * y - rhs + strong * y;
        Matrix next = soft_threshold(y - step * grad, step * lambda);
        const double change = max_abs_diff(next, x);
        y = next + beta * (next - x);
        x = std::move(next);
        result.iterations = it;
        if (change <= opts.tol) {
            result.converged = true;
            break;
        }
    }
    result.value = std::move(x);
    return result;
}

Matrix d_update_linearized(const Matrix& D0, const Matrix& grad_local, const Matrix& pi_tilde, double tau,
                           double alpha)
{
    require(tau > 0.0, "tau_D must be positive");
    require(grad_local.rows() == D0.rows() && grad_local.cols() == D0.cols(), "gradient shape mismatch");
    require(pi_tilde.rows() == D0.rows() && pi_tilde.cols() == D0.cols(), "pi_tilde shape mismatch");
    return project_dictionary(D0 - (grad_local + pi_tilde) / tau, alpha);
}

InnerResult d_update_plain(const Matrix& D0, const Matrix& X, const Matrix& S, const Matrix& pi_tilde, double tau,
                           double alpha, const InnerOptions& opts)
{
    require(tau > 0.0, "tau_D must be positive");
    require(opts.tol > 0.0, "inner tolerance must be positive");
    check_product_shapes(D0, X, S);
    require(pi_tilde.rows() == D0.rows() && pi_tilde.cols() == D0.cols(), "pi_tilde shape mismatch");

    const Matrix gram = X * X.transpose();
    const Matrix lin = S * X.transpose() + tau * D0 - pi_tilde;
    const double sx = sigma_max(X).value;
    const double L = sx * sx + tau;
    const double step = 1.0 / L;
    const double beta = strong_momentum(L, tau);

    InnerResult result{D0, 0, false};
    Matrix d = D0;
    Matrix y = D0;
    for (int it = 1; it <= opts.max_iter; ++it) {
        const Matrix grad = y * gram + tau * y - lin;
        Matrix next = project_dictionary(y - step * grad, alpha);
        const double change = max_abs_diff(next, d);
        y = next + beta * (next - d);
        d = std::move(next);
        result.iterations = it;
        if (change <= opts.tol) {
            result.converged = true;
            break;
        }
    }
    result.value = std::move(d);
    return result;
}

SigmaMaxResult sigma_max(const Matrix& A, double tol, int max_iter)
{
    require(A.size() > 0, "sigma_max needs a nonempty matrix");
    const Matrix gram = A.cols() <= A.rows() ? Matrix(A.transpose() * A) : Matrix(A * A.transpose());
    const Index n = gram.rows();
    const double scale = gram.cwiseAbs().maxCoeff();
    if (scale == 0.0) return {0.0, 0, true};

    // All-ones first; if the Gram matrix annihilates it, fall back to an
    // alternating-sign vector and then to canonical basis vectors.
    auto start = [n](Index attempt) {
        Vector v(n);
        if (attempt == 0) {
            v.setOnes();
        } else if (attempt == 1) {
            for (Index j = 0; j < n; ++j) v(j) = (j % 2 == 0) ? 1.0 : -1.0;
        } else {
            v.setZero();
            v(attempt - 2) = 1.0;
        }
        return Vector(v / v.norm());
    };

    Vector v;
    Vector gv;
    for (Index attempt = 0; attempt < n + 2; ++attempt) {
        v = start(attempt);
        gv = gram * v;
        if (gv.norm() > 1e-14 * scale * static_cast<double>(n)) break;
    }

    double estimate = v.dot(gv);
    SigmaMaxResult result{0.0, 0, false};
    for (int it = 1; it <= max_iter; ++it) {
        const double norm = gv.norm();
        if (norm == 0.0) {
            result.converged = true;
            break;
        }
        v = gv / norm;
        gv = gram * v;
        const double next = v.dot(gv);
        result.iterations = it;
        const bool done = std::abs(next - estimate) <= tol * std::abs(next);
        estimate = next;
        if (done) {
            result.converged = true;
            break;
        }
    }
    result.value = std::sqrt(std::max(estimate, 0.0));
    return result;
}

}  // namespace d2l
