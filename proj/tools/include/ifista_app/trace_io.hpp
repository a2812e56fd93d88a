#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include <ifista/solvers.hpp>

namespace ifista::app {

inline constexpr std::array<const char*, 10> kTraceColumns = {
    "k", "t_k", "gamma_k", "delta_k", "b_norm", "F_gap", "energy", "bound_rhs", "cert_excess", "x_dist_to_ref"};

/// Numbers use %.17g; NaN is written as an empty field.
std::string format_number(double v);

void write_trace_csv(std::ostream& out, const SolverTrace& trace);
void write_trace_csv(const std::string& path, const SolverTrace& trace);

/// Stochastic runs: per-k mean gap, max energy and bound in the trace schema.
SolverTrace aggregate_as_trace(const StochasticResult& result);

void write_aggregate_csv(const std::string& path, const StochasticResult& result);

/// Thrown when a trace file does not follow the 10-column schema.
class TraceFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct TraceTable {
    std::vector<std::vector<double>> columns;  // indexed like kTraceColumns, NaN for empty
    std::size_t rows() const { return columns.empty() ? 0 : columns[0].size(); }
    const std::vector<double>& col(const char* name) const;
};

TraceTable read_trace_csv(const std::string& path);

void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

}  // namespace ifista::app
