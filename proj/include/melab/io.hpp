#pragma once

#include <cstdio>
#include <string>
#include <vector>

namespace melab::io {

// %.6g rendering used in metrics files (schema-stable, platform-independent
// for the value ranges we emit).
inline std::string fmt_g6(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// Shortest exact round-trip rendering for dataset/model payloads.
inline std::string fmt_exact(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::string> split_csv_line(const std::string& line);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace melab::io
