#include "d2l/synthetic.hpp"

#include "d2l/image.hpp"

#include <numeric>
#include <random>
#include <vector>

namespace d2l {

std::pair<SyntheticInstance, ProblemData> make_synthetic(const SyntheticSpec& spec)
{
    if (spec.dim < 1 || spec.atoms < 1 || spec.samples < 1) throw InstanceError("sizes must be positive");
    if (spec.sparsity < 0 || spec.sparsity > spec.atoms) throw InstanceError("sparsity must lie in [0, K]");
    if (spec.agents < 1 || spec.samples < spec.agents) throw InstanceError("need at least one sample per agent");
    if (!(spec.noise >= 0.0)) throw InstanceError("noise level must be non-negative");

    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    SyntheticInstance inst;
    inst.noise = spec.noise;
    inst.D_star.resize(spec.dim, spec.atoms);
    for (Index k = 0; k < spec.atoms; ++k) {
        Vector v(spec.dim);
        do {
            for (Index r = 0; r < spec.dim; ++r) v(r) = gauss(rng);
        } while (v.norm() == 0.0);
        inst.D_star.col(k) = spec.alpha * v / v.norm();
    }

    inst.X_star = Matrix::Zero(spec.atoms, spec.samples);
    std::vector<Index> pool(static_cast<std::size_t>(spec.atoms));
    for (Index c = 0; c < spec.samples; ++c) {
        std::iota(pool.begin(), pool.end(), Index{0});
        for (Index k = 0; k < spec.sparsity; ++k) {
            std::uniform_int_distribution<Index> pick(k, spec.atoms - 1);
            std::swap(pool[k], pool[pick(rng)]);
            double value = 0.0;
            do {
                value = gauss(rng);
            } while (value == 0.0);
            inst.X_star(pool[k], c) = value;
        }
    }

    inst.S = inst.D_star * inst.X_star;
    for (Index c = 0; c < spec.samples; ++c)
        for (Index r = 0; r < spec.dim; ++r) inst.S(r, c) += spec.noise * gauss(rng);

    ProblemData problem;
    problem.atoms = spec.atoms;
    problem.lambda = spec.lambda;
    problem.mu = spec.mu;
    problem.alpha = spec.alpha;
    Index start = 0;
    for (Index n : even_split(spec.samples, spec.agents)) {
        problem.blocks.push_back(inst.S.middleCols(start, n));
        start += n;
    }
    return {std::move(inst), std::move(problem)};
}

}  // namespace d2l
