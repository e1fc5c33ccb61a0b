#pragma once

#include <string>
#include <utility>
#include <vector>

namespace hyperchoq::io {

/// Shortest text that round-trips the double (17 significant digits).
std::string format_double(double v);

/// Writes content to path through a temporary file and rename, so readers
/// never observe a partial file.
void write_file_atomic(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

/// Plain numeric CSV with a leading block of '# key: value' comments,
/// UTF-8, '\n' line endings.
struct CsvTable {
    std::vector<std::pair<std::string, std::string>> comments;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

std::string format_csv(const CsvTable& table);
CsvTable parse_csv(const std::string& text);

}  // namespace hyperchoq::io
