#include "wc4dvar/csv.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace wc4dvar {

std::string csv_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_file_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot write '" + tmp.string() + "'");
        out << content;
    }
    fs::rename(tmp, target);
}

Index CsvTable::column(const std::string& name) const {
    for (size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<Index>(i);
    return -1;
}

double CsvTable::number(Index row, Index col) const {
    return std::stod(rows.at(row).at(col));
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open CSV '" + path + "'");
    CsvTable table;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::string item;
        std::istringstream ls(line);
        while (std::getline(ls, item, ',')) fields.push_back(item);
        if (!line.empty() && line.back() == ',') fields.push_back("");
        if (first) {
            table.header = fields;
            first = false;
        } else {
            if (fields.size() != table.header.size())
                throw ConfigError("malformed CSV '" + path + "': ragged row");
            table.rows.push_back(std::move(fields));
        }
    }
    if (first) throw ConfigError("malformed CSV '" + path + "': missing header");
    return table;
}

}  // namespace wc4dvar
