#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace sohkit {

/// One labeled simulation output, column-oriented. Temperatures are stored in
/// degrees Celsius to match the on-disk schema; the simulator converts from
/// Kelvin when it emits rows.
struct Trace {
    std::string sim_id;
    std::vector<double> time_s;
    std::vector<double> current_a;
    std::vector<double> voltage_v;
    std::vector<double> t_amb_c;
    std::vector<double> t_cell_c;
    std::vector<double> soc_true;
    std::vector<double> soh;
    std::vector<double> soc_est;  // present only when the filter ran
    std::vector<double> r0_est;

    std::size_t rows() const { return time_s.size(); }
    bool has_estimates() const { return !soc_est.empty(); }

    void reserve(std::size_t n);
    /// Checks the schema invariants: constant strictly increasing time step and
    /// a non-increasing soh column. Throws DataError on violation.
    void validate() const;
};

/// Formats a double with 9 significant digits, locale independent.
std::string format_value(double v);

/// Writes the trace as CSV with the canonical column header.
void write_trace(const Trace& trace, const std::string& path);

/// Reads and validates a trace CSV; parse failures report the line number.
Trace read_trace(const std::string& path);

}  // namespace sohkit
