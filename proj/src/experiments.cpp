#include "d2l/experiments.hpp"

#include "d2l/reference.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace d2l {

ProblemData synthetic_problem(const ExperimentConfig& cfg)
{
    return make_synthetic(cfg.synthetic).second;
}

MetricsTrace run_synthetic(const ExperimentConfig& cfg)
{
    cfg.validate();
    return run(synthetic_problem(cfg), cfg.run);
}

Image denoise_source(const ExperimentConfig& cfg)
{
    const int size = cfg.denoise.image_size;
    if (cfg.denoise.image.empty()) return make_test_image(size, size);
    const Image full = read_pgm(cfg.denoise.image);
    if (full.width < size || full.height < size) throw ConfigError("image is smaller than image_size");
    const int x0 = (full.width - size) / 2;
    const int y0 = (full.height - size) / 2;
    Image crop(size, size);
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) crop.at(x, y) = full.at(x0 + x, y0 + y);
    return crop;
}

DenoiseResult run_denoise(const Image& clean, const ExperimentConfig& cfg)
{
    cfg.validate();
    const auto& dn = cfg.denoise;
    DenoiseResult res;
    res.clean = clean;
    res.noise_sigma = noise_sigma_for_psnr(clean, dn.noise_psnr, dn.noise_seed);
    res.noisy = add_gaussian_noise(clean, res.noise_sigma, dn.noise_seed);
    res.input = psnr_mse(clean, res.noisy);

    const auto data = extract_patches(res.noisy, dn.patch, dn.stride, cfg.synthetic.agents, dn.patch_peak / 255.0);
    ProblemData problem;
    problem.blocks = data.blocks();
    problem.atoms = cfg.synthetic.atoms;
    problem.lambda = cfg.synthetic.lambda;
    problem.mu = cfg.synthetic.mu;
    problem.alpha = cfg.synthetic.alpha;

    Simulation sim(std::move(problem), cfg.run);
    res.trace = sim.run();
    res.denoised = reconstruct_image(data, sim.mean_dictionary(), sim.codes());
    res.output = psnr_mse(clean, res.denoised);
    return res;
}

std::vector<std::pair<std::string, MetricsTrace>> run_compare(const ExperimentConfig& cfg)
{
    cfg.validate();
    const ProblemData problem = synthetic_problem(cfg);
    const long budget = *std::max_element(cfg.budgets.begin(), cfg.budgets.end());

    std::vector<std::pair<std::string, MetricsTrace>> out;
    for (XVariant v : {XVariant::linearized, XVariant::plain}) {
        RunConfig rc = cfg.run;
        rc.sched.variant = v;
        rc.max_rounds = budget / 2;
        out.emplace_back(std::string(to_string(v)), run(problem, rc));
    }
    RunConfig rc = cfg.run;
    rc.max_rounds = budget;
    out.emplace_back("diffusion", diffusion_baseline(problem, rc));
    return out;
}

namespace {

CheckResult check(std::string name, bool pass, const std::string& detail = {})
{
    return {std::move(name), pass, detail};
}

std::string num(double x)
{
    std::ostringstream ss;
    ss.precision(3);
    ss << x;
    return ss.str();
}

// Worst relative error of an analytic gradient against central differences.
template <class F, class G>
double gradient_check(const Matrix& at, F&& f, G&& grad)
{
    const double h = 1e-6;
    const Matrix g = grad(at);
    Matrix fd(at.rows(), at.cols());
    Matrix p = at;
    for (Index k = 0; k < at.size(); ++k) {
        const double orig = p(k);
        p(k) = orig + h;
        const double up = f(p);
        p(k) = orig - h;
        const double down = f(p);
        p(k) = orig;
        fd(k) = (up - down) / (2.0 * h);
    }
    return (g - fd).norm() / std::max(fd.norm(), 1e-12);
}

}  // namespace

std::vector<CheckResult> run_validate(const ExperimentConfig& cfg)
{
    std::vector<CheckResult> out;
    try {
        cfg.validate();
        out.push_back(check("config", true));
    } catch (const std::exception& e) {
        out.push_back(check("config", false, e.what()));
        return out;
    }

    const int agents = cfg.synthetic.agents;
    ScheduleSpec spec = cfg.run.graph;
    spec.agents = agents;
    try {
        const GraphSchedule s = build_schedule(spec);
        out.push_back(check("configured schedule connected over window",
                            check_B_strong_connectivity(s, spec.window)));

        // Mixing over many rounds must reach the uniform average.
        Matrix prod = Matrix::Identity(agents, agents);
        const long rounds = 200L * s.period();
        for (long r = 0; r < rounds; ++r) prod = s.weights(r).W * prod;
        const double dev = (prod - Matrix::Constant(agents, agents, 1.0 / agents)).cwiseAbs().maxCoeff();
        out.push_back(check("weight products converge to uniform average", dev <= 1e-8, "max dev " + num(dev)));
    } catch (const std::exception& e) {
        out.push_back(check("configured schedule connected over window", false, e.what()));
    }

    const ScheduleKind kinds[] = {ScheduleKind::static_path, ScheduleKind::static_ring,
                                  ScheduleKind::static_random_geometric, ScheduleKind::tv_ring_partition,
                                  ScheduleKind::static_directed_ring};
    for (ScheduleKind kind : kinds) {
        ScheduleSpec ks = spec;
        ks.kind = kind;
        ks.period = std::min(2, std::max(1, agents - 1));
        ks.window = kind == ScheduleKind::tv_ring_partition ? ks.period : 1;
        const std::string name = "schedule " + std::string(to_string(kind));
        try {
            const GraphSchedule s = build_schedule(ks);
            bool ok = check_B_strong_connectivity(s, ks.window);
            for (int p = 0; p < s.period(); ++p)
                ok = ok && validate_weights(s.weights(p).W, s.graph(p), ks.theta_min);
            out.push_back(check(name, ok));
        } catch (const std::exception& e) {
            out.push_back(check(name, false, e.what()));
        }
    }

    std::mt19937_64 rng(cfg.run.seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    auto random = [&](Index r, Index c) { return Matrix(Matrix::NullaryExpr(r, c, [&] { return unit(rng); })); };
    double worst = 0.0;
    for (int t = 0; t < 10; ++t) {
        const Matrix D = random(4, 3), X = random(3, 6), S = random(4, 6);
        worst = std::max(worst, gradient_check(
                                    D, [&](const Matrix& Z) { return local_fit(Z, X, S); },
                                    [&](const Matrix& Z) { return grad_D_f(Z, X, S); }));
        worst = std::max(worst, gradient_check(
                                    X, [&](const Matrix& Z) { return local_fit(D, Z, S); },
                                    [&](const Matrix& Z) { return grad_X_f(D, Z, S); }));
    }
    out.push_back(check("gradients match finite differences", worst <= 1e-5, "worst rel err " + num(worst)));

    {
        const Matrix D = 3.0 * random(5, 7);
        const Matrix P = project_dictionary(D, cfg.synthetic.alpha);
        const Matrix PP = project_dictionary(P, cfg.synthetic.alpha);
        bool ok = (P - PP).cwiseAbs().maxCoeff() == 0.0;
        for (Index k = 0; k < P.cols(); ++k) ok = ok && P.col(k).norm() <= cfg.synthetic.alpha + 1e-12;
        out.push_back(check("projection feasible and idempotent", ok));
    }

    try {
        RunConfig rc = cfg.run;
        rc.max_rounds = std::min<long>(rc.max_rounds, 50);
        Simulation sim(synthetic_problem(cfg), rc);
        double dev = 0.0;
        sim.run([&](const Simulation& s) {
            Matrix mean_theta = Matrix::Zero(s.agents().front().Theta.rows(), s.agents().front().Theta.cols());
            Matrix mean_grad = mean_theta;
            for (std::size_t i = 0; i < s.agents().size(); ++i) {
                mean_theta += s.agents()[i].Theta;
                mean_grad += grad_D_f(s.agents()[i].D, s.agents()[i].X, s.problem().blocks[i]);
            }
            dev = std::max(dev, (mean_theta - mean_grad).cwiseAbs().maxCoeff() / s.num_agents());
        });
        out.push_back(check("tracking mean identity", dev <= 1e-10, "max dev " + num(dev)));
    } catch (const std::exception& e) {
        out.push_back(check("tracking mean identity", false, e.what()));
    }
    return out;
}

}  // namespace d2l
