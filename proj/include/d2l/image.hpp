#pragma once

// Grayscale images, PGM input/output, and the sliding-patch data pipeline
// used by the denoising experiment.

#include "d2l/dlcore.hpp"
#include "d2l/merit.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace d2l {

/// Raised on malformed PGM input; `offset` is the byte position of the fault.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t offset)
        : std::runtime_error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset)
    {
    }
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

/// Row-major grayscale pixels on the 0..255 scale.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<double> pixels;

    Image() = default;
    Image(int w, int h, double fill = 0.0) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {}

    double& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
    double at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

/// Accepts P2 (ASCII) and P5 (binary) with maxval 255.
Image parse_pgm(const std::string& bytes);
Image read_pgm(const std::filesystem::path& path);

/// Pixels are rounded and clamped to 0..255.
std::string encode_pgm(const Image& img, bool binary = true);
void write_pgm(const std::filesystem::path& path, const Image& img, bool binary = true);

ImageQuality psnr_mse(const Image& reference, const Image& test);

/// Sliding patches of a source image. Column c of `patches` is the patch
/// whose top-left corner is origins[c]; inside a patch entries are row-major.
/// Values are pixel * value_scale.
struct ImagePatchDataset {
    Image source;
    int patch = 8;
    int stride = 1;
    double value_scale = 1.0;
    Matrix patches;
    std::vector<std::pair<int, int>> origins;  // (x, y)
    std::vector<Index> block_starts;           // agent i owns [block_starts[i], block_starts[i+1])

    Index num_patches() const { return patches.cols(); }
    /// Splits the patch matrix into contiguous column blocks, one per agent.
    std::vector<Matrix> blocks() const;
};

/// Sizes of `total` items split over `parts` as evenly as possible.
std::vector<Index> even_split(Index total, int parts);

ImagePatchDataset extract_patches(const Image& img, int patch, int stride, int agents = 1, double value_scale = 1.0);

/// Places the columns of D X (X blocks concatenated) at their origins,
/// averages overlaps, and clamps to 0..255. Pixels that no patch covers keep
/// the source value.
Image reconstruct_image(const ImagePatchDataset& data, const Matrix& D, const std::vector<Matrix>& codes);

/// Number of patches covering each pixel.
std::vector<int> coverage_counts(const ImagePatchDataset& data);

/// Deterministic piecewise-smooth test picture (gradients, disks, bars).
Image make_test_image(int width, int height);

/// Adds N(0, sigma^2) noise, then rounds and clamps to 8-bit values.
Image add_gaussian_noise(const Image& img, double sigma, std::uint64_t seed);

/// Noise level whose 8-bit noisy image hits `target_psnr` (bisection over
/// sigma with a fixed noise pattern).
double noise_sigma_for_psnr(const Image& img, double target_psnr, std::uint64_t seed);

}  // namespace d2l
