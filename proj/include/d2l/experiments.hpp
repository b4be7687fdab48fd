#pragma once

// Experiment drivers behind the CLI subcommands.

#include "d2l/config.hpp"
#include "d2l/image.hpp"
#include "d2l/merit.hpp"

#include <string>
#include <utility>
#include <vector>

namespace d2l {

ProblemData synthetic_problem(const ExperimentConfig& cfg);

/// Distributed run on the configured synthetic instance.
MetricsTrace run_synthetic(const ExperimentConfig& cfg);

/// Clean picture for the denoising task: the configured PGM (center-cropped
/// to image_size) or the built-in test picture.
Image denoise_source(const ExperimentConfig& cfg);

struct DenoiseResult {
    Image clean;
    Image noisy;
    Image denoised;
    double noise_sigma = 0.0;
    ImageQuality input;
    ImageQuality output;
    MetricsTrace trace;
};

DenoiseResult run_denoise(const Image& clean, const ExperimentConfig& cfg);

/// Both distributed variants and the diffusion baseline, each run up to the
/// largest message budget. Labels: linearized, plain, diffusion.
std::vector<std::pair<std::string, MetricsTrace>> run_compare(const ExperimentConfig& cfg);

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

/// Graph, weight, gradient, projection and tracking self-checks.
std::vector<CheckResult> run_validate(const ExperimentConfig& cfg);

}  // namespace d2l
