#pragma once

#include "wc4dvar/types.hpp"

#include <string>
#include <vector>

namespace wc4dvar {

// %.17g so values round-trip exactly.
std::string csv_number(double v);

// Writes content to path via a temporary file and rename, UTF-8 with LF
// line endings.
void write_file_atomic(const std::string& path, const std::string& content);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    Index column(const std::string& name) const;  // -1 when absent
    double number(Index row, Index col) const;
};

CsvTable read_csv(const std::string& path);

}  // namespace wc4dvar
