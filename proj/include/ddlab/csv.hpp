#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace ddlab {

/// Locale-independent decimal rendering: shortest round-trip form for
/// doubles (std::to_chars), plain digits for integers.
std::string format_double(double value);

/// Minimal CSV emitter: one header row, then rows of preformatted cells.
/// Unquoted; callers keep cells free of commas/newlines.
class CsvWriter {
public:
    CsvWriter(std::string path, std::vector<std::string> columns);
    void add_row(std::vector<std::string> cells);
    void write() const;

    const std::string& path() const { return path_; }

private:
    std::string path_;
    std::vector<std::string> columns_;
    std::vector<std::vector<std::string>> rows_;
};

/// Replayable run record: ordered key = value lines. Every parameter that
/// influenced the output is present; duration/version are informational.
using ManifestEntries = std::vector<std::pair<std::string, std::string>>;

void write_manifest(const std::string& path, const ManifestEntries& entries);
ManifestEntries read_manifest(const std::string& path);

/// Value lookup; throws when the key is absent.
std::string manifest_get(const ManifestEntries& entries, const std::string& key);
bool manifest_has(const ManifestEntries& entries, const std::string& key);

} // namespace ddlab
