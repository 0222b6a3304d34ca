#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace yieldopt {

/// Shortest text that parses back to the same double ("%.17g").
std::string format_double(double v);

/// Writes to a temporary sibling and renames it into place, so readers see
/// either the complete file or nothing.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

std::string read_file(const std::filesystem::path& path);

/// Minimal CSV table builder (no quoting; fields never contain commas).
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header);

    CsvTable& row(std::vector<std::string> fields);
    std::string str() const;
    void write(const std::filesystem::path& path) const { write_file_atomic(path, str()); }

    static std::vector<std::vector<std::string>> parse(const std::string& text);

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

}  // namespace yieldopt
