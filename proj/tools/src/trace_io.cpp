#include "ifista_app/trace_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace ifista::app {

std::string format_number(double v)
{
    if (std::isnan(v)) return "";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_trace_csv(std::ostream& out, const SolverTrace& trace)
{
    for (std::size_t i = 0; i < kTraceColumns.size(); ++i) out << (i ? "," : "") << kTraceColumns[i];
    out << '\n';
    for (const auto& r : trace.rows) {
        out << r.k << ',' << format_number(r.t) << ',' << format_number(r.gamma) << ',' << format_number(r.delta)
            << ',' << format_number(r.b_norm) << ',' << format_number(r.F_gap) << ',' << format_number(r.energy)
            << ',' << format_number(r.bound_rhs) << ',' << format_number(r.cert_excess) << ','
            << format_number(r.x_dist) << '\n';
    }
}

void write_trace_csv(const std::string& path, const SolverTrace& trace)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    write_trace_csv(out, trace);
}

SolverTrace aggregate_as_trace(const StochasticResult& result)
{
    SolverTrace out;
    const auto& first = result.replications.at(0);
    out.has_reference = first.has_reference;
    out.initial_dist2 = first.initial_dist2;
    const double R = static_cast<double>(result.replications.size());
    for (std::size_t k = 0; k < result.aggregate.size(); ++k) {
        TraceRow row = first.rows[k];
        const auto& a = result.aggregate[k];
        row.F_gap = a.mean_gap;
        row.energy = a.max_energy;
        row.bound_rhs = a.bound_rhs;
        double b = 0.0, ex = 0.0, xd = 0.0;
        for (const auto& tr : result.replications) {
            b += tr.rows[k].b_norm;
            ex = std::max(ex, tr.rows[k].cert_excess);
            xd += tr.rows[k].x_dist;
        }
        row.b_norm = b / R;
        row.cert_excess = ex;
        row.x_dist = xd / R;
        out.rows.push_back(row);
    }
    out.final_x = first.final_x;
    return out;
}

void write_aggregate_csv(const std::string& path, const StochasticResult& result)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << "k,mean_F_gap,se_F_gap,bound_rhs,max_energy,hypothesis\n";
    for (const auto& a : result.aggregate)
        out << a.k << ',' << format_number(a.mean_gap) << ',' << format_number(a.se_gap) << ','
            << format_number(a.bound_rhs) << ',' << format_number(a.max_energy) << ','
            << format_number(a.hypothesis) << '\n';
}

const std::vector<double>& TraceTable::col(const char* name) const
{
    for (std::size_t i = 0; i < kTraceColumns.size(); ++i)
        if (std::string(kTraceColumns[i]) == name) return columns.at(i);
    throw std::out_of_range(std::string("no column ") + name);
}

namespace {

std::vector<std::string> split(const std::string& line)
{
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace

TraceTable read_trace_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw TraceFormatError("cannot read trace '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw TraceFormatError("trace '" + path + "' is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split(line);
    for (const char* col : kTraceColumns)
        if (std::find(header.begin(), header.end(), col) == header.end())
            throw TraceFormatError("trace is missing column '" + std::string(col) + "'");
    if (header.size() != kTraceColumns.size())
        throw TraceFormatError("trace has " + std::to_string(header.size()) + " columns, expected exactly 10");
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] != kTraceColumns[i])
            throw TraceFormatError("trace column " + std::to_string(i + 1) + " is '" + header[i] + "', expected '"
                                   + kTraceColumns[i] + "'");

    TraceTable t;
    t.columns.resize(kTraceColumns.size());
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split(line);
        if (cells.size() != kTraceColumns.size())
            throw TraceFormatError("trace line " + std::to_string(lineno) + " has " + std::to_string(cells.size())
                                   + " fields");
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (cells[i].empty()) {
                t.columns[i].push_back(std::nan(""));
                continue;
            }
            char* end = nullptr;
            const double v = std::strtod(cells[i].c_str(), &end);
            if (end == cells[i].c_str() || *end != '\0')
                throw TraceFormatError("trace line " + std::to_string(lineno) + ", column '" + kTraceColumns[i]
                                       + "': not a number");
            t.columns[i].push_back(v);
        }
    }
    return t;
}

void write_text_file(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << text;
}

std::string read_text_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace ifista::app
