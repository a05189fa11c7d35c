#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ipose/errors.hpp"

namespace ipose {

/// One experiment trial (or frame). Position errors are expressed in the robot
/// frame in meters; lateral error is the horizontal x-y distance. Units are SI
/// throughout.
struct ErrorRecord {
    std::string experiment;
    int trial{0};
    double distance_m{0.0};
    double yaw_rad{0.0};
    double err_x_m{0.0};
    double err_y_m{0.0};
    double err_z_m{0.0};
    double lateral_err_m{0.0};
    double rot_err_rad{0.0};
    bool refined{false};
    bool filtered{false};
    bool dropped{false};
};

enum class OutputFormat { csv, json };

inline OutputFormat output_format_from_string(const std::string& s) {
    if (s == "csv") {
        return OutputFormat::csv;
    }
    if (s == "json") {
        return OutputFormat::json;
    }
    throw ConfigError("format must be 'csv' or 'json'");
}

inline constexpr const char* kResultsCsvHeader =
    "experiment,trial,distance_m,yaw_rad,err_x_m,err_y_m,err_z_m,lateral_err_m,"
    "rot_err_rad,refined,filtered,dropped";

namespace detail {

/// Shortest decimal representation that parses back to the same double.
inline std::string format_double(double v) {
    std::array<char, 32> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

inline double parse_double(const std::string& s) {
    return std::strtod(s.c_str(), nullptr);
}

}  // namespace detail

inline void write_results_csv(std::span<const ErrorRecord> records, std::ostream& out) {
    out << kResultsCsvHeader << '\n';
    for (const auto& r : records) {
        out << r.experiment << ',' << r.trial << ',' << detail::format_double(r.distance_m)
            << ',' << detail::format_double(r.yaw_rad) << ','
            << detail::format_double(r.err_x_m) << ',' << detail::format_double(r.err_y_m)
            << ',' << detail::format_double(r.err_z_m) << ','
            << detail::format_double(r.lateral_err_m) << ','
            << detail::format_double(r.rot_err_rad) << ',' << (r.refined ? 1 : 0) << ','
            << (r.filtered ? 1 : 0) << ',' << (r.dropped ? 1 : 0) << '\n';
    }
}

inline nlohmann::json results_to_json(std::span<const ErrorRecord> records) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : records) {
        arr.push_back({{"experiment", r.experiment},
                       {"trial", r.trial},
                       {"distance_m", r.distance_m},
                       {"yaw_rad", r.yaw_rad},
                       {"err_x_m", r.err_x_m},
                       {"err_y_m", r.err_y_m},
                       {"err_z_m", r.err_z_m},
                       {"lateral_err_m", r.lateral_err_m},
                       {"rot_err_rad", r.rot_err_rad},
                       {"refined", r.refined},
                       {"filtered", r.filtered},
                       {"dropped", r.dropped}});
    }
    return arr;
}

/// Writes records to a file; CSV column order is fixed by kResultsCsvHeader,
/// the JSON form mirrors the same fields.
inline void write_results(std::span<const ErrorRecord> records, const std::string& path,
                          OutputFormat format) {
    std::ofstream out(path, std::ios::binary);  // binary: byte-stable newlines
    if (!out) {
        throw IoError("cannot open '" + path + "' for writing");
    }
    if (format == OutputFormat::csv) {
        write_results_csv(records, out);
    } else {
        out << results_to_json(records).dump(2) << '\n';
    }
    if (!out) {
        throw IoError("write failed for '" + path + "'");
    }
}

inline std::vector<ErrorRecord> read_results_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kResultsCsvHeader) {
        throw IoError("missing or unexpected results CSV header");
    }
    std::vector<ErrorRecord> records;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        std::stringstream ss(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ss, field, ',')) {
            fields.push_back(field);
        }
        if (fields.size() != 12) {
            throw IoError("results CSV row with " + std::to_string(fields.size()) +
                          " fields");
        }
        ErrorRecord r;
        r.experiment = fields[0];
        r.trial = std::atoi(fields[1].c_str());
        r.distance_m = detail::parse_double(fields[2]);
        r.yaw_rad = detail::parse_double(fields[3]);
        r.err_x_m = detail::parse_double(fields[4]);
        r.err_y_m = detail::parse_double(fields[5]);
        r.err_z_m = detail::parse_double(fields[6]);
        r.lateral_err_m = detail::parse_double(fields[7]);
        r.rot_err_rad = detail::parse_double(fields[8]);
        r.refined = fields[9] == "1";
        r.filtered = fields[10] == "1";
        r.dropped = fields[11] == "1";
        records.push_back(r);
    }
    return records;
}

inline std::vector<ErrorRecord> read_results_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open '" + path + "'");
    }
    return read_results_csv(in);
}

}  // namespace ipose
