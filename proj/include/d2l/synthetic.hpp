#pragma once

// Planted sparse-dictionary instances with a known generating model.

#include "d2l/dlcore.hpp"

#include <cstdint>
#include <utility>

namespace d2l {

struct SyntheticSpec {
    Index dim = 16;       // M
    Index atoms = 24;     // K
    Index samples = 200;  // N
    int agents = 5;       // I
    Index sparsity = 3;   // k0 nonzeros per code column
    double noise = 0.05;  // sigma_n
    std::uint64_t seed = 7;
    double lambda = 0.1;
    double mu = 0.05;
    double alpha = 1.0;
};

struct SyntheticInstance {
    Matrix D_star;  // columns of norm alpha
    Matrix X_star;  // exactly k0 nonzeros per column
    Matrix S;       // D_star X_star + noise
    double noise = 0.0;
};

/// Deterministic given the seed. Columns of S are split into contiguous
/// agent blocks whose sizes differ by at most one.
std::pair<SyntheticInstance, ProblemData> make_synthetic(const SyntheticSpec& spec);

}  // namespace d2l
