#pragma once

// Shared helpers for the test programs: seeded random matrices and a
// central-difference gradient.

#include "d2l/dlcore.hpp"

#include <algorithm>
#include <functional>
#include <random>

namespace d2l::test {

class Rand {
public:
    explicit Rand(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo = -1.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    double normal() { return std::normal_distribution<double>(0.0, 1.0)(rng_); }

    Matrix matrix(Index r, Index c, double lo = -1.0, double hi = 1.0)
    {
        Matrix m(r, c);
        for (Index k = 0; k < m.size(); ++k) m(k) = uniform(lo, hi);
        return m;
    }

    std::mt19937_64& engine() { return rng_; }

private:
    std::mt19937_64 rng_;
};

inline Matrix central_difference(const Matrix& at, const std::function<double(const Matrix&)>& f, double h = 1e-6)
{
    Matrix out(at.rows(), at.cols());
    Matrix p = at;
    for (Index k = 0; k < at.size(); ++k) {
        const double orig = p(k);
        p(k) = orig + h;
        const double up = f(p);
        p(k) = orig - h;
        const double down = f(p);
        p(k) = orig;
        out(k) = (up - down) / (2.0 * h);
    }
    return out;
}

inline double rel_err(const Matrix& a, const Matrix& b)
{
    return (a - b).norm() / std::max(b.norm(), 1e-12);
}

inline double max_abs(const Matrix& a) { return a.size() ? a.cwiseAbs().maxCoeff() : 0.0; }

// Minimizer of a convex 1-D function on [lo, hi] by repeated grid refinement:
// evaluate on a uniform grid, shrink to the two cells around the best node.
inline double grid_argmin(const std::function<double(double)>& f, double lo, double hi, int nodes = 201,
                          int levels = 12)
{
    const double lo0 = lo, hi0 = hi;
    double best = lo;
    for (int l = 0; l < levels; ++l) {
        const double h = (hi - lo) / (nodes - 1);
        double best_v = f(lo);
        best = lo;
        for (int k = 1; k < nodes; ++k) {
            const double x = lo + k * h;
            const double v = f(x);
            if (v < best_v) {
                best_v = v;
                best = x;
            }
        }
        lo = std::max(lo0, best - h);
        hi = std::min(hi0, best + h);
    }
    return best;
}

}  // namespace d2l::test
