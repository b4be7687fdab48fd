#include "d2l/merit.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace d2l {

const MetricsRow& MetricsTrace::at_or_before(long round) const
{
    const MetricsRow* found = nullptr;
    for (const auto& r : rows)
        if (r.nu <= round) found = &r;
    if (!found) throw std::out_of_range("no metrics row at or before the requested round");
    return *found;
}

const MetricsRow& MetricsTrace::at_message_budget(long budget) const
{
    const MetricsRow* found = nullptr;
    for (const auto& r : rows)
        if (r.messages <= budget) found = &r;
    if (!found) throw std::out_of_range("no metrics row within the message budget");
    return *found;
}

std::string format_number(double x)
{
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    if (std::isnan(x)) return "nan";
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return ec == std::errc{} ? std::string(buf, end) : std::string("nan");
}

namespace {

void write_row(std::ostream& os, const MetricsRow& r)
{
    os << r.nu << ',' << r.messages << ',' << format_number(r.objective) << ',' << format_number(r.delta) << ','
       << format_number(r.cons_err) << ',' << format_number(r.gamma) << '\n';
}

}  // namespace

void write_csv(std::ostream& os, const MetricsTrace& trace)
{
    os << kCsvHeader << '\n';
    for (const auto& r : trace.rows) write_row(os, r);
}

std::string to_csv(const MetricsTrace& trace)
{
    std::ostringstream ss;
    write_csv(ss, trace);
    return ss.str();
}

void write_merged_csv(std::ostream& os, const std::vector<std::pair<std::string, MetricsTrace>>& traces)
{
    os << "algorithm," << kCsvHeader << '\n';
    for (const auto& [name, trace] : traces) {
        for (const auto& r : trace.rows) {
            os << name << ',';
            write_row(os, r);
        }
    }
}

Matrix average_dictionary(const std::vector<Matrix>& copies)
{
    if (copies.empty()) throw InstanceError("cannot average an empty set of dictionaries");
    // Offsets from the first copy, so identical copies average to themselves
    // bit for bit.
    const Matrix& base = copies.front();
    Matrix offset = Matrix::Zero(base.rows(), base.cols());
    for (std::size_t i = 1; i < copies.size(); ++i) offset += copies[i] - base;
    return base + offset / static_cast<double>(copies.size());
}

double stationarity_gap(const Matrix& D_bar, const std::vector<Matrix>& codes, const ProblemData& problem)
{
    if (codes.size() != problem.blocks.size()) throw InstanceError("one code block per agent expected");
    const double agents = static_cast<double>(codes.size());

    Matrix grad_sum = Matrix::Zero(D_bar.rows(), D_bar.cols());
    for (std::size_t i = 0; i < codes.size(); ++i) grad_sum += grad_D_f(D_bar, codes[i], problem.blocks[i]);
    const Matrix D_hat = project_dictionary(D_bar - grad_sum / agents, problem.alpha);

    double gap = D_bar.size() ? (D_bar - D_hat).cwiseAbs().maxCoeff() : 0.0;
    for (std::size_t i = 0; i < codes.size(); ++i) {
        if (codes[i].size() == 0) continue;
        const Matrix X_hat =
            x_update_linearized(codes[i], D_bar, problem.blocks[i], 1.0, problem.lambda, problem.mu);
        gap = std::max(gap, (codes[i] - X_hat).cwiseAbs().maxCoeff());
    }
    return gap;
}

double consensus_error(const std::vector<Matrix>& copies, const Matrix& D_bar)
{
    double err = 0.0;
    for (const auto& D : copies) {
        if (D.rows() != D_bar.rows() || D.cols() != D_bar.cols()) throw InstanceError("dictionary shape mismatch");
        if (D.size()) err = std::max(err, (D - D_bar).cwiseAbs().maxCoeff());
    }
    return err;
}

ImageQuality psnr_mse(std::span<const double> reference, std::span<const double> test)
{
    if (reference.size() != test.size()) throw InstanceError("images differ in size");
    if (reference.empty()) throw InstanceError("empty images");
    double acc = 0.0;
    for (std::size_t k = 0; k < reference.size(); ++k) {
        const double d = reference[k] - test[k];
        acc += d * d;
    }
    const double mse = acc / static_cast<double>(reference.size());
    const double psnr =
        mse == 0.0 ? std::numeric_limits<double>::infinity() : 10.0 * std::log10(255.0 * 255.0 / mse);
    return {psnr, mse};
}

}  // namespace d2l
