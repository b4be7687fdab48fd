#include "d2l/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <random>
#include <sstream>

namespace d2l {

namespace {

class HeaderReader {
public:
    HeaderReader(const std::string& bytes, std::size_t start) : b_(bytes), pos_(start) {}

    std::size_t pos() const { return pos_; }

    void skip_space_and_comments()
    {
        while (pos_ < b_.size()) {
            const auto c = static_cast<unsigned char>(b_[pos_]);
            if (std::isspace(c)) {
                ++pos_;
            } else if (c == '#') {
                while (pos_ < b_.size() && b_[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
    }

    long number(const char* what)
    {
        skip_space_and_comments();
        const std::size_t start = pos_;
        long v = 0;
        while (pos_ < b_.size() && std::isdigit(static_cast<unsigned char>(b_[pos_]))) {
            v = v * 10 + (b_[pos_] - '0');
            if (v > 1'000'000'000L) throw ParseError(std::string("value too large for ") + what, start);
            ++pos_;
        }
        if (pos_ == start) {
            if (pos_ >= b_.size()) throw ParseError(std::string("truncated input, expected ") + what, pos_);
            throw ParseError(std::string("expected ") + what, start);
        }
        return v;
    }

    // Exactly one whitespace byte separates the header from binary data.
    void single_whitespace()
    {
        if (pos_ >= b_.size() || !std::isspace(static_cast<unsigned char>(b_[pos_])))
            throw ParseError("expected whitespace after maxval", pos_);
        ++pos_;
    }

private:
    const std::string& b_;
    std::size_t pos_;
};

long to_byte(double v)
{
    return std::clamp(std::lround(v), 0L, 255L);
}

}  // namespace

Image parse_pgm(const std::string& bytes)
{
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '2' && bytes[1] != '5'))
        throw ParseError("not a P2/P5 PGM file", 0);
    const bool binary = bytes[1] == '5';
    HeaderReader rd(bytes, 2);
    const long width = rd.number("width");
    const long height = rd.number("height");
    const std::size_t maxval_pos = rd.pos();
    const long maxval = rd.number("maxval");
    if (width < 1 || height < 1) throw ParseError("image dimensions must be positive", maxval_pos);
    if (maxval != 255) throw ParseError("only maxval 255 is supported", maxval_pos);

    Image img(static_cast<int>(width), static_cast<int>(height));
    const std::size_t count = img.pixels.size();
    if (binary) {
        rd.single_whitespace();
        const std::size_t start = rd.pos();
        if (bytes.size() - start < count) throw ParseError("truncated pixel payload", bytes.size());
        for (std::size_t k = 0; k < count; ++k) img.pixels[k] = static_cast<unsigned char>(bytes[start + k]);
    } else {
        for (std::size_t k = 0; k < count; ++k) {
            const std::size_t at = rd.pos();
            const long v = rd.number("pixel value");
            if (v > maxval) throw ParseError("pixel value exceeds maxval", at);
            img.pixels[k] = static_cast<double>(v);
        }
    }
    return img;
}

Image read_pgm(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_pgm(bytes);
}

std::string encode_pgm(const Image& img, bool binary)
{
    std::ostringstream os;
    os << (binary ? "P5" : "P2") << '\n' << img.width << ' ' << img.height << '\n' << 255 << '\n';
    if (binary) {
        for (double v : img.pixels) os.put(static_cast<char>(static_cast<unsigned char>(to_byte(v))));
    } else {
        for (int y = 0; y < img.height; ++y) {
            for (int x = 0; x < img.width; ++x) os << (x ? " " : "") << to_byte(img.at(x, y));
            os << '\n';
        }
    }
    return os.str();
}

void write_pgm(const std::filesystem::path& path, const Image& img, bool binary)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << encode_pgm(img, binary);
}

ImageQuality psnr_mse(const Image& reference, const Image& test)
{
    if (reference.width != test.width || reference.height != test.height)
        throw InstanceError("images differ in size");
    return psnr_mse(std::span<const double>(reference.pixels), std::span<const double>(test.pixels));
}

std::vector<Index> even_split(Index total, int parts)
{
    if (parts < 1) throw InstanceError("need at least one part");
    if (total < parts) throw InstanceError("fewer items than parts; some agent would be empty");
    std::vector<Index> sizes(static_cast<std::size_t>(parts), total / parts);
    for (Index k = 0; k < total % parts; ++k) ++sizes[static_cast<std::size_t>(k)];
    return sizes;
}

std::vector<Matrix> ImagePatchDataset::blocks() const
{
    std::vector<Matrix> out;
    for (std::size_t i = 0; i + 1 < block_starts.size(); ++i)
        out.push_back(patches.middleCols(block_starts[i], block_starts[i + 1] - block_starts[i]));
    return out;
}

ImagePatchDataset extract_patches(const Image& img, int patch, int stride, int agents, double value_scale)
{
    if (patch < 1 || stride < 1) throw InstanceError("patch size and stride must be positive");
    if (patch > std::min(img.width, img.height)) throw InstanceError("patch larger than the image");

    ImagePatchDataset d;
    d.source = img;
    d.patch = patch;
    d.stride = stride;
    d.value_scale = value_scale;
    for (int y = 0; y + patch <= img.height; y += stride)
        for (int x = 0; x + patch <= img.width; x += stride) d.origins.emplace_back(x, y);

    d.patches.resize(static_cast<Index>(patch) * patch, static_cast<Index>(d.origins.size()));
    for (std::size_t c = 0; c < d.origins.size(); ++c) {
        const auto [ox, oy] = d.origins[c];
        for (int r = 0; r < patch; ++r)
            for (int q = 0; q < patch; ++q)
                d.patches(r * patch + q, static_cast<Index>(c)) = img.at(ox + q, oy + r) * value_scale;
    }

    const auto sizes = even_split(d.num_patches(), agents);
    d.block_starts.push_back(0);
    for (Index s : sizes) d.block_starts.push_back(d.block_starts.back() + s);
    return d;
}

std::vector<int> coverage_counts(const ImagePatchDataset& data)
{
    std::vector<int> count(data.source.pixels.size(), 0);
    for (const auto& [ox, oy] : data.origins)
        for (int r = 0; r < data.patch; ++r)
            for (int q = 0; q < data.patch; ++q) ++count[static_cast<std::size_t>(oy + r) * data.source.width + ox + q];
    return count;
}

Image reconstruct_image(const ImagePatchDataset& data, const Matrix& D, const std::vector<Matrix>& codes)
{
    Index total = 0;
    for (const auto& X : codes) {
        if (X.rows() != D.cols()) throw InstanceError("code rows must match dictionary columns");
        total += X.cols();
    }
    if (total != data.num_patches()) throw InstanceError("codes do not cover every patch");
    const Index p2 = static_cast<Index>(data.patch) * data.patch;
    if (D.rows() != p2) throw InstanceError("dictionary rows must equal the patch size");

    const Image& src = data.source;
    std::vector<double> acc(src.pixels.size(), 0.0);
    const auto count = coverage_counts(data);
    Index col = 0;
    for (const auto& X : codes) {
        const Matrix P = D * X;
        for (Index c = 0; c < P.cols(); ++c, ++col) {
            const auto [ox, oy] = data.origins[static_cast<std::size_t>(col)];
            for (int r = 0; r < data.patch; ++r)
                for (int q = 0; q < data.patch; ++q)
                    acc[static_cast<std::size_t>(oy + r) * src.width + ox + q] += P(r * data.patch + q, c);
        }
    }

    Image out(src.width, src.height);
    for (std::size_t k = 0; k < acc.size(); ++k) {
        const double v = count[k] > 0 ? acc[k] / count[k] / data.value_scale : src.pixels[k];
        out.pixels[k] = std::clamp(v, 0.0, 255.0);
    }
    return out;
}

Image make_test_image(int width, int height)
{
    Image img(width, height);
    const double w = width;
    const double h = height;
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const double u = x / w;
            const double v = y / h;
            double val = 60.0 + 90.0 * u + 40.0 * v;                                      // background ramp
            if (std::hypot(u - 0.33, v - 0.35) < 0.22) val = 215.0 - 60.0 * v;            // bright disk
            if (u > 0.55 && u < 0.9 && v > 0.55 && v < 0.85) val = 30.0;                  // dark block
            if (u > 0.1 && u < 0.45 && v > 0.72 && v < 0.9 && (x / 3) % 2 == 0) val = 240.0;  // bars
            if (std::hypot(u - 0.75, v - 0.25) < 0.12) val = 120.0 + 80.0 * std::sin(6.0 * u);
            img.at(x, y) = std::round(val);
        }
    }
    return img;
}

Image add_gaussian_noise(const Image& img, double sigma, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    Image out = img;
    for (auto& p : out.pixels) p = static_cast<double>(to_byte(p + sigma * noise(rng)));
    return out;
}

double noise_sigma_for_psnr(const Image& img, double target_psnr, std::uint64_t seed)
{
    double lo = 0.0;
    double hi = 255.0;
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double psnr = psnr_mse(img, add_gaussian_noise(img, mid, seed)).psnr_db;
        if (psnr > target_psnr)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace d2l
