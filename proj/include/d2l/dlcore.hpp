#pragma once

// Problem instance, objective and gradients of the column-partitioned
// elastic-net dictionary learning problem, and the proximal / projection
// primitives shared by every solver in the library.

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace d2l {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Raised when matrix shapes or problem parameters are inconsistent.
class InstanceError : public std::invalid_argument {
public:
    explicit InstanceError(const std::string& what) : std::invalid_argument(what) {}
};

/// Global instance: data column blocks S_i (one per agent) and the
/// regularization / constraint parameters shared by all agents.
struct ProblemData {
    std::vector<Matrix> blocks;  // S_i, each M x n_i
    Index atoms = 0;             // K
    double lambda = 0.0;         // l1 weight
    double mu = 0.0;             // squared-Frobenius weight
    double alpha = 1.0;          // column-norm bound of the dictionary

    Index ambient_dim() const { return blocks.empty() ? 0 : blocks.front().rows(); }
    Index total_samples() const;
    std::size_t num_agents() const { return blocks.size(); }

    /// Throws InstanceError unless every invariant of the instance holds.
    void validate() const;
};

/// 1/2 ||S_i - D X_i||_F^2
double local_fit(const Matrix& D, const Matrix& X, const Matrix& S);

/// Sum over agents of 1/2||S_i - D X_i||^2 + lambda ||X_i||_{1,1} + mu ||X_i||_F^2.
double objective_global(const Matrix& D, const std::vector<Matrix>& codes, const ProblemData& problem);

/// (D X - S) X^T
Matrix grad_D_f(const Matrix& D, const Matrix& X, const Matrix& S);

/// D^T (D X - S)
Matrix grad_X_f(const Matrix& D, const Matrix& X, const Matrix& S);

/// Scales every column with norm above alpha back onto the alpha-sphere.
/// An infinite alpha is the unconstrained identity.
Matrix project_dictionary(const Matrix& D, double alpha);

/// max(|x| - theta, 0) sign(x), with sign(0) = 0.
inline double soft_threshold(double x, double theta)
{
    if (x > theta) return x - theta;
    if (x < -theta) return x + theta;
    return 0.0;
}

Matrix soft_threshold(const Matrix& A, double theta);

/// Outcome of an iterative inner solve. `converged` is false when the
/// iteration budget ran out; the iterate is still the best one available.
struct InnerResult {
    Matrix value;
    int iterations = 0;
    bool converged = true;
};

struct InnerOptions {
    double tol = 1e-8;
    int max_iter = 2000;
};

/// Closed-form minimizer of the linearized sparse-coding surrogate
///   <grad_X f(U, X0), X - X0> + tau/2 ||X - X0||^2 + lambda ||X||_1 + mu ||X||^2,
/// i.e. tau/(2mu + tau) * T_{lambda/tau}(X0 - grad/tau).
Matrix x_update_linearized(const Matrix& X0, const Matrix& U, const Matrix& S, double tau, double lambda,
                           double mu);

/// Minimizer of f(U, X) + tau/2 ||X - X0||^2 + lambda ||X||_1 + mu ||X||^2
/// by accelerated proximal gradient, warm-started at X0.
InnerResult x_update_plain(const Matrix& X0, const Matrix& U, const Matrix& S, double tau, double lambda,
                           double mu, const InnerOptions& opts = {});

/// P_D[D0 - (grad_local + pi_tilde) / tau]
Matrix d_update_linearized(const Matrix& D0, const Matrix& grad_local, const Matrix& pi_tilde, double tau,
                           double alpha);

/// Minimizer over the column-norm ball set of
///   f(D, X) + tau/2 ||D - D0||^2 + <pi_tilde, D - D0>
/// by accelerated projected gradient with step 1/(sigma_max(X)^2 + tau).
InnerResult d_update_plain(const Matrix& D0, const Matrix& X, const Matrix& S, const Matrix& pi_tilde, double tau,
                           double alpha, const InnerOptions& opts = {});

struct SigmaMaxResult {
    double value = 0.0;
    int iterations = 0;
    bool converged = true;
};

/// Largest singular value by power iteration on the smaller Gram matrix,
/// started from the normalized all-ones vector.
SigmaMaxResult sigma_max(const Matrix& A, double tol = 1e-13, int max_iter = 20000);

}  // namespace d2l
