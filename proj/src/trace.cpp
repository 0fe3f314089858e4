#include "sohkit/trace.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "sohkit/errors.hpp"

namespace sohkit {

namespace {

constexpr const char* kBaseHeader = "time_s,current_a,voltage_v,t_amb_c,t_cell_c,soc_true,soh";
constexpr const char* kEstHeader =
    "time_s,current_a,voltage_v,t_amb_c,t_cell_c,soc_true,soh,soc_est,r0_est";

double parse_field(const std::string& field, const std::string& path, int line_no) {
    double v = 0.0;
    const char* begin = field.data();
    const char* end = begin + field.size();
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc{} || ptr != end)
        throw DataError(path + ":" + std::to_string(line_no) + ": bad numeric field '" +
                        field + "'");
    return v;
}

}  // namespace

std::string format_value(double v) {
    char buf[40];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 9);
    if (ec != std::errc{}) throw NumericError("format_value: to_chars failed");
    return std::string(buf, ptr);
}

void Trace::reserve(std::size_t n) {
    time_s.reserve(n);
    current_a.reserve(n);
    voltage_v.reserve(n);
    t_amb_c.reserve(n);
    t_cell_c.reserve(n);
    soc_true.reserve(n);
    soh.reserve(n);
}

void Trace::validate() const {
    const std::size_t n = rows();
    if (current_a.size() != n || voltage_v.size() != n || t_amb_c.size() != n ||
        t_cell_c.size() != n || soc_true.size() != n || soh.size() != n)
        throw DataError("trace '" + sim_id + "': column lengths differ");
    if (has_estimates() && (soc_est.size() != n || r0_est.size() != n))
        throw DataError("trace '" + sim_id + "': estimate column lengths differ");
    if (n < 2) return;
    const double step = time_s[1] - time_s[0];
    if (!(step > 0)) throw DataError("trace '" + sim_id + "': time not increasing");
    const double tol = 1e-9 * std::max(1.0, step);
    for (std::size_t i = 1; i < n; ++i) {
        if (std::abs((time_s[i] - time_s[i - 1]) - step) > tol)
            throw DataError("trace '" + sim_id + "': non-constant time step at row " +
                            std::to_string(i));
        if (soh[i] > soh[i - 1] + 1e-15)
            throw DataError("trace '" + sim_id + "': soh increases at row " + std::to_string(i));
    }
}

void write_trace(const Trace& trace, const std::string& path) {
    trace.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open trace for writing: " + path);

    const bool est = trace.has_estimates();
    out << (est ? kEstHeader : kBaseHeader) << '\n';

    std::string line;
    line.reserve(160);
    for (std::size_t i = 0; i < trace.rows(); ++i) {
        line.clear();
        line += format_value(trace.time_s[i]);
        line += ',';
        line += format_value(trace.current_a[i]);
        line += ',';
        line += format_value(trace.voltage_v[i]);
        line += ',';
        line += format_value(trace.t_amb_c[i]);
        line += ',';
        line += format_value(trace.t_cell_c[i]);
        line += ',';
        line += format_value(trace.soc_true[i]);
        line += ',';
        line += format_value(trace.soh[i]);
        if (est) {
            line += ',';
            line += format_value(trace.soc_est[i]);
            line += ',';
            line += format_value(trace.r0_est[i]);
        }
        line += '\n';
        out << line;
    }
    if (!out) throw DataError("write failed: " + path);
}

Trace read_trace(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open trace: " + path);

    std::string line;
    if (!std::getline(in, line)) throw DataError(path + ":1: missing header");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    bool est = false;
    if (line == kEstHeader)
        est = true;
    else if (line != kBaseHeader)
        throw DataError(path + ":1: unexpected header '" + line + "'");

    Trace trace;
    {
        // derive sim_id from the file name
        auto slash = path.find_last_of("/\\");
        std::string name = slash == std::string::npos ? path : path.substr(slash + 1);
        auto dot = name.rfind('.');
        trace.sim_id = dot == std::string::npos ? name : name.substr(0, dot);
    }

    const std::size_t want = est ? 9 : 7;
    std::vector<std::string> fields;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;

        fields.clear();
        std::size_t start = 0;
        while (true) {
            const auto comma = line.find(',', start);
            fields.push_back(line.substr(start, comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (fields.size() != want)
            throw DataError(path + ":" + std::to_string(line_no) + ": expected " +
                            std::to_string(want) + " fields, got " +
                            std::to_string(fields.size()));

        trace.time_s.push_back(parse_field(fields[0], path, line_no));
        trace.current_a.push_back(parse_field(fields[1], path, line_no));
        trace.voltage_v.push_back(parse_field(fields[2], path, line_no));
        trace.t_amb_c.push_back(parse_field(fields[3], path, line_no));
        trace.t_cell_c.push_back(parse_field(fields[4], path, line_no));
        trace.soc_true.push_back(parse_field(fields[5], path, line_no));
        trace.soh.push_back(parse_field(fields[6], path, line_no));
        if (est) {
            trace.soc_est.push_back(parse_field(fields[7], path, line_no));
            trace.r0_est.push_back(parse_field(fields[8], path, line_no));
        }
    }
    trace.validate();
    return trace;
}

}  // namespace sohkit
