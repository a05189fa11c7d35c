#pragma once

#include <bit>
#include <cstddef>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "ipose/belief.hpp"
#include "ipose/errors.hpp"

namespace ipose {

// Stack file format: one JSON header line {"width","height","n","type"}
// followed by raw little-endian float32 grids, row-major. Belief files carry n
// planes; affinity files carry n fields as an x-plane then a y-plane each.
static_assert(std::endian::native == std::endian::little,
              "stack files are little-endian; this build targets LE hosts only");

namespace detail {

inline void write_planes(std::ostream& out, const std::vector<float>& values) {
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size() * sizeof(float)));
}

inline void read_planes(std::istream& in, std::vector<float>& values) {
    in.read(reinterpret_cast<char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(float)));
    if (!in) {
        throw IoError("stack file truncated");
    }
}

inline nlohmann::json read_stack_header(std::istream& in, const std::string& expected_type) {
    std::string line;
    if (!std::getline(in, line)) {
        throw IoError("missing stack header line");
    }
    nlohmann::json header = nlohmann::json::parse(line, nullptr, false);
    if (header.is_discarded() || !header.is_object()) {
        throw IoError("malformed stack header");
    }
    if (header.value("type", "") != expected_type) {
        throw IoError("expected stack type '" + expected_type + "'");
    }
    for (const char* key : {"width", "height", "n"}) {
        if (!header.contains(key) || !header[key].is_number_integer() ||
            header[key].get<int>() <= 0) {
            throw IoError(std::string("bad stack header field '") + key + "'");
        }
    }
    return header;
}

}  // namespace detail

inline void save_belief_stack(const BeliefMapStack& stack, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open '" + path + "' for writing");
    }
    const nlohmann::json header = {
        {"width", stack.width}, {"height", stack.height}, {"n", stack.n}, {"type", "belief"}};
    out << header.dump() << '\n';
    detail::write_planes(out, stack.values);
    if (!out) {
        throw IoError("write failed for '" + path + "'");
    }
}

inline BeliefMapStack load_belief_stack(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open '" + path + "'");
    }
    const nlohmann::json header = detail::read_stack_header(in, "belief");
    BeliefMapStack stack = BeliefMapStack::zeros(
        header["width"].get<int>(), header["height"].get<int>(), header["n"].get<int>());
    detail::read_planes(in, stack.values);
    return stack;
}

inline void save_affinity_stack(const AffinityFieldStack& stack, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open '" + path + "' for writing");
    }
    const nlohmann::json header = {
        {"width", stack.width}, {"height", stack.height}, {"n", stack.m}, {"type", "affinity"}};
    out << header.dump() << '\n';
    const std::size_t plane = static_cast<std::size_t>(stack.width) *
                              static_cast<std::size_t>(stack.height);
    for (int field = 0; field < stack.m; ++field) {
        const std::size_t off = static_cast<std::size_t>(field) * plane;
        out.write(reinterpret_cast<const char*>(stack.x_values.data() + off),
                  static_cast<std::streamsize>(plane * sizeof(float)));
        out.write(reinterpret_cast<const char*>(stack.y_values.data() + off),
                  static_cast<std::streamsize>(plane * sizeof(float)));
    }
    if (!out) {
        throw IoError("write failed for '" + path + "'");
    }
}

inline AffinityFieldStack load_affinity_stack(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open '" + path + "'");
    }
    const nlohmann::json header = detail::read_stack_header(in, "affinity");
    AffinityFieldStack stack = AffinityFieldStack::zeros(
        header["width"].get<int>(), header["height"].get<int>(), header["n"].get<int>());
    const std::size_t plane = static_cast<std::size_t>(stack.width) *
                              static_cast<std::size_t>(stack.height);
    for (int field = 0; field < stack.m; ++field) {
        const std::size_t off = static_cast<std::size_t>(field) * plane;
        in.read(reinterpret_cast<char*>(stack.x_values.data() + off),
                static_cast<std::streamsize>(plane * sizeof(float)));
        in.read(reinterpret_cast<char*>(stack.y_values.data() + off),
                static_cast<std::streamsize>(plane * sizeof(float)));
    }
    if (!in) {
        throw IoError("stack file truncated");
    }
    return stack;
}

}  // namespace ipose
