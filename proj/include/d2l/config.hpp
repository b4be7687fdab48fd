#pragma once

// Flat key=value experiment configuration shared by the CLI subcommands.
//
// Lines are `key = value`; blank lines and everything after `#` are ignored.
// Unknown keys are rejected. Recognized keys:
//
//   problem:   M K N agents k0 sigma_n data_seed lambda mu alpha
//   schedules: gamma0 eps_gamma tau_d eps_tau variant d_mode inner_tol inner_max_iter
//   network:   graph window period graph_seed theta_min
//   run:       rounds stop_tol metric_stride seed tracking
//   denoise:   image image_size patch stride noise_psnr noise_seed patch_peak
//   compare:   budgets (comma separated message budgets)

#include "d2l/protocol.hpp"
#include "d2l/synthetic.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace d2l {

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct DenoiseSettings {
    std::string image;  // empty: built-in test picture
    int image_size = 64;
    int patch = 8;
    int stride = 2;
    double noise_psnr = 20.0;
    std::uint64_t noise_seed = 11;
    double patch_peak = 2.0;  // data value of a 255 pixel
};

struct ExperimentConfig {
    SyntheticSpec synthetic{};
    RunConfig run{};
    DenoiseSettings denoise{};
    std::vector<long> budgets{200, 1000};

    /// Standard synthetic test bed (M=16, K=24, N=200, I=5).
    static ExperimentConfig synthetic_defaults();
    /// Desk-scale denoising: 64x64 picture, 8x8 patches, stride 2, I=10, K=64.
    static ExperimentConfig denoise_defaults();

    /// Applies one `key=value` setting; throws ConfigError on unknown keys or
    /// malformed values.
    void set(const std::string& key, const std::string& value);
    void validate() const;
};

void apply_config_text(ExperimentConfig& cfg, const std::string& text);
void apply_config_file(ExperimentConfig& cfg, const std::filesystem::path& path);

}  // namespace d2l
