#pragma once

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "smc.hpp"
#include "trajectory.hpp"

namespace logifit {

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) {
        while (!field.empty() && (field.back() == '\r' || field.back() == ' ' || field.back() == '\t'))
            field.pop_back();
        std::size_t start = field.find_first_not_of(" \t");
        out.push_back(start == std::string::npos ? "" : field.substr(start));
    }
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace detail

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// FNV-1a 64-bit digest, hex-encoded.
inline std::string fnv1a_digest(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::string digest_file(const std::string& path) { return fnv1a_digest(read_file(path)); }

inline void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write file: " + path);
    out << "t";
    for (const auto& n : traj.names) out << "," << n;
    out << "\n";
    for (std::size_t r = 0; r < traj.rows(); ++r) {
        out << detail::format_double(traj.times[r]);
        for (std::size_t c = 0; c < traj.width(); ++c)
            out << "," << detail::format_double(traj.value(r, c));
        out << "\n";
    }
}

inline void write_observations_csv(const std::string& path, const DesignMatrix& data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write file: " + path);
    for (std::size_t i = 0; i < data.names.size(); ++i)
        out << (i ? "," : "") << data.names[i];
    out << "\n";
    for (std::uint32_t row : data.rows) {
        std::string bits = outcome_bits(row, data.dim());
        for (std::size_t i = 0; i < bits.size(); ++i) out << (i ? "," : "") << bits[i];
        out << "\n";
    }
}

/// Observation design matrix: header of formula names, then rows of 0/1.
inline DesignMatrix read_observations_csv(const std::string& path) {
    std::istringstream in(read_file(path));
    std::string line;
    DesignMatrix data;
    std::size_t lineno = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        auto fields = detail::split_csv_line(line);
        if (!have_header) {
            for (const auto& f : fields) {
                if (f.empty())
                    throw ValidationError(path + ":" + std::to_string(lineno) +
                                          ": empty formula name in header");
                data.names.push_back(f);
            }
            if (data.names.size() > 20)
                throw ValidationError(path + ": too many formula columns");
            have_header = true;
            continue;
        }
        if (fields.size() != data.names.size())
            throw ValidationError(path + ":" + std::to_string(lineno) + ": expected " +
                                  std::to_string(data.names.size()) + " fields, found " +
                                  std::to_string(fields.size()));
        std::vector<bool> bits(fields.size());
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (fields[i] == "0")
                bits[i] = false;
            else if (fields[i] == "1")
                bits[i] = true;
            else
                throw ValidationError(path + ":" + std::to_string(lineno) +
                                      ": observation entries must be 0 or 1, found '" + fields[i] +
                                      "'");
        }
        data.rows.push_back(outcome_index(bits));
    }
    if (!have_header) throw ValidationError(path + ": empty observation file");
    if (data.rows.empty()) throw ValidationError(path + ": observation file has no data rows");
    return data;
}

/// Target distribution: one `bitstring,probability` row per joint outcome.
/// Bit i (left to right) is the truth value of formula i.
inline std::vector<double> read_target_csv(const std::string& path, std::size_t d) {
    if (d == 0 || d > 20) throw ValidationError("formula count out of range");
    std::istringstream in(read_file(path));
    std::string line;
    const std::size_t n = std::size_t{1} << d;
    std::vector<double> target(n, -1.0);
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r" || line[0] == '#') continue;
        auto fields = detail::split_csv_line(line);
        if (fields.size() != 2)
            throw ValidationError(path + ":" + std::to_string(lineno) +
                                  ": expected 'bitstring,probability'");
        const std::string& bits = fields[0];
        if (bits.size() != d)
            throw ValidationError(path + ":" + std::to_string(lineno) + ": bitstring '" + bits +
                                  "' does not have " + std::to_string(d) + " bits");
        std::uint32_t idx = 0;
        for (char c : bits) {
            if (c != '0' && c != '1')
                throw ValidationError(path + ":" + std::to_string(lineno) + ": bitstring '" + bits +
                                      "' contains a character other than 0/1");
            idx = (idx << 1) | static_cast<std::uint32_t>(c - '0');
        }
        if (target[idx] >= 0.0)
            throw ValidationError(path + ":" + std::to_string(lineno) + ": duplicate outcome '" +
                                  bits + "'");
        char* end = nullptr;
        double p = std::strtod(fields[1].c_str(), &end);
        if (end == fields[1].c_str() || *end != '\0')
            throw ValidationError(path + ":" + std::to_string(lineno) + ": bad probability '" +
                                  fields[1] + "'");
        if (p < 0.0)
            throw ValidationError(path + ":" + std::to_string(lineno) + ": negative probability '" +
                                  fields[1] + "'");
        target[idx] = p;
    }
    for (std::size_t j = 0; j < n; ++j)
        if (target[j] < 0.0)
            throw ValidationError(path + ": missing outcome '" + outcome_bits(static_cast<std::uint32_t>(j), d) +
                                  "' (need all " + std::to_string(n) + " rows)");
    validate_target(target, d, 1e-6);
    return target;
}

inline void write_target_csv(const std::string& path, const std::vector<double>& target,
                             std::size_t d) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write file: " + path);
    for (std::size_t j = 0; j < target.size(); ++j)
        out << outcome_bits(static_cast<std::uint32_t>(j), d) << ","
            << detail::format_double(target[j]) << "\n";
}

} // namespace logifit
