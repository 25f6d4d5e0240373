#include "ddlab/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <system_error>

namespace ddlab {

std::string format_double(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    if (res.ec != std::errc()) throw std::runtime_error("format_double: conversion failed");
    return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(std::string path, std::vector<std::string> columns)
    : path_(std::move(path)), columns_(std::move(columns)) {}

void CsvWriter::add_row(std::vector<std::string> cells) {
    if (cells.size() != columns_.size())
        throw std::invalid_argument("CsvWriter: row width mismatch for " + path_);
    rows_.push_back(std::move(cells));
}

void CsvWriter::write() const {
    std::ofstream out(path_, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("CsvWriter: cannot open " + path_);
    for (std::size_t c = 0; c < columns_.size(); ++c) {
        if (c) out << ',';
        out << columns_[c];
    }
    out << '\n';
    for (const auto& row : rows_) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out << ',';
            out << row[c];
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("CsvWriter: write failed for " + path_);
}

void write_manifest(const std::string& path, const ManifestEntries& entries) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("write_manifest: cannot open " + path);
    for (const auto& [key, value] : entries) out << key << " = " << value << '\n';
    if (!out) throw std::runtime_error("write_manifest: write failed for " + path);
}

ManifestEntries read_manifest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_manifest: cannot open " + path);
    ManifestEntries entries;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line.front() == '#') continue;
        const auto pos = line.find(" = ");
        if (pos == std::string::npos)
            throw std::runtime_error("read_manifest: malformed line in " + path + ": " + line);
        entries.emplace_back(line.substr(0, pos), line.substr(pos + 3));
    }
    return entries;
}

std::string manifest_get(const ManifestEntries& entries, const std::string& key) {
    for (const auto& [k, v] : entries)
        if (k == key) return v;
    throw std::runtime_error("manifest: missing key " + key);
}

bool manifest_has(const ManifestEntries& entries, const std::string& key) {
    for (const auto& [k, v] : entries)
        if (k == key) return true;
    return false;
}

} // namespace ddlab
