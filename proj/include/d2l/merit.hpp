#pragma once

// Merit functions (distance from stationarity, consensus disagreement),
// image-quality scores, and the per-round metrics trace with its CSV form.

#include "d2l/dlcore.hpp"

#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace d2l {

struct MetricsRow {
    long nu = 0;
    long messages = 0;
    double objective = 0.0;
    double delta = 0.0;
    double cons_err = 0.0;
    double gamma = 0.0;
    int flags = 0;  // inner solves that hit their iteration budget so far
};

struct MetricsTrace {
    std::vector<MetricsRow> rows;

    const MetricsRow& back() const { return rows.back(); }
    /// Last recorded row with nu <= round (rows are ordered by nu).
    const MetricsRow& at_or_before(long round) const;
    /// Last recorded row with messages <= budget.
    const MetricsRow& at_message_budget(long budget) const;
};

inline constexpr const char* kCsvHeader = "nu,messages,objective,delta,cons_err,gamma";

/// Shortest round-trip decimal form; used for all CSV numbers.
std::string format_number(double x);

/// Header plus one line per row, columns as in kCsvHeader.
void write_csv(std::ostream& os, const MetricsTrace& trace);
std::string to_csv(const MetricsTrace& trace);

/// Rows of several labelled traces, prefixed with an `algorithm` column.
void write_merged_csv(std::ostream& os, const std::vector<std::pair<std::string, MetricsTrace>>& traces);

Matrix average_dictionary(const std::vector<Matrix>& copies);

/// Max-norm of the stacked gap between (D_bar, X) and the unit-weight
/// linearized surrogate minimizers evaluated at that point.
double stationarity_gap(const Matrix& D_bar, const std::vector<Matrix>& codes, const ProblemData& problem);

/// max_i ||D_i - D_bar||_max
double consensus_error(const std::vector<Matrix>& copies, const Matrix& D_bar);

struct ImageQuality {
    double psnr_db = 0.0;  // +infinity for identical inputs
    double mse = 0.0;
};

/// Peak 255.
ImageQuality psnr_mse(std::span<const double> reference, std::span<const double> test);

}  // namespace d2l
