#ifndef PARAFORGE_IO_H_
#define PARAFORGE_IO_H_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace paraforge {

// Whole-file helpers. All of them throw Error(kIo) on failure.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

// Writes to a sibling temp file and renames it over `path`, so readers
// never observe a partial file.
void write_file_atomic(const std::filesystem::path& path,
                       std::string_view contents);

// Lower-case hex SHA-256 digest.
std::string sha256_hex(std::string_view bytes);

// RFC 4180 CSV.
std::string csv_escape(std::string_view field);
std::string csv_row(const std::vector<std::string>& fields);

struct CsvRecord {
  std::size_t line = 0;  // 1-based physical line where the record starts
  std::vector<std::string> fields;
};

// Parses a full document. Quoted fields may span lines. Throws Error(kParse)
// on an unterminated quote.
std::vector<CsvRecord> parse_csv(std::string_view text);

}  // namespace paraforge

#endif  // PARAFORGE_IO_H_
