#include "ecgunc/csv.hpp"

#include <charconv>
#include <sstream>

#include "ecgunc/errors.hpp"

namespace ecgunc {

std::string fmt_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) throw NumericError("fmt_double: conversion failed");
    return std::string(buf, ptr);
}

CsvWriter::CsvWriter(const std::string& path) : os_(path), path_(path) {
    if (!os_) throw IoError("cannot open for writing: " + path);
}

void CsvWriter::row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) os_ << ',';
        os_ << fields[i];
    }
    os_ << '\n';
    if (!os_) throw IoError("write failed: " + path_);
}

int CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return static_cast<int>(i);
    }
    return -1;
}

CsvTable read_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open: " + path);
    CsvTable table;
    std::string line;
    bool first = true;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::istringstream ls(line);
        std::string field;
        while (std::getline(ls, field, ',')) fields.push_back(field);
        if (line.back() == ',') fields.emplace_back();
        if (first) {
            table.header = std::move(fields);
            first = false;
        } else {
            table.rows.push_back(std::move(fields));
        }
    }
    return table;
}

} // namespace ecgunc
