#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sievenet/dgp.hpp"

namespace sievenet {

/// Shortest round-trip decimal for a double (what the CSV emitters use).
inline std::string format_double(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline void write_sample_csv(const TimeSeriesSample& sample, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << "t,y";
    for (std::size_t j = 1; j <= sample.dim; ++j) out << ",x_" << j;
    out << "\n";
    for (std::size_t t = 0; t < sample.size(); ++t) {
        out << (t + 1) << ',' << format_double(sample.y[t]);
        const auto row = sample.x_row(t);
        for (double v : row) out << ',' << format_double(v);
        out << "\n";
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

inline TimeSeriesSample read_sample_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty sample file: " + path.string());

    // header: t,y,x_1,...,x_d
    std::size_t cols = 1;
    for (char c : line)
        if (c == ',') ++cols;
    if (cols < 2) throw std::runtime_error("malformed sample header: " + path.string());

    TimeSeriesSample sample;
    sample.dim = cols - 2;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string field;
        std::vector<double> vals;
        while (std::getline(ss, field, ',')) vals.push_back(std::stod(field));
        if (vals.size() != cols)
            throw std::runtime_error("malformed sample row: " + path.string());
        sample.y.push_back(vals[1]);
        for (std::size_t j = 2; j < vals.size(); ++j) sample.x.push_back(vals[j]);
    }
    if (sample.size() == 0) throw std::runtime_error("sample file has no rows: " + path.string());
    return sample;
}

}  // namespace sievenet
