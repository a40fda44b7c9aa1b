#pragma once

#include <fstream>
#include <string>
#include <vector>

namespace ecgunc {

/// Shortest round-trip decimal form of v; deterministic for identical bits.
std::string fmt_double(double v);

class CsvWriter {
public:
    explicit CsvWriter(const std::string& path);
    void row(const std::vector<std::string>& fields);

private:
    std::ofstream os_;
    std::string path_;
};

/// Minimal reader for the artifact's own files: comma-split, no quoting.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const; // -1 when absent
};

CsvTable read_csv(const std::string& path);

} // namespace ecgunc
