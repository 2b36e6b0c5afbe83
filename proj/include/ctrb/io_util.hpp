#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ctrb {

// Machine outputs carry 17 significant digits so doubles round-trip;
// human summaries carry 6.
std::string fmt_double17(double v);
std::string fmt_double6(double v);
std::string fmt_double12(double v);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// Write-temp-then-rename, so readers never observe a partial file.
void write_text_file_atomic(const std::string& path,
                            const std::string& content);

std::vector<std::string> split_lines(const std::string& text);

// Minimal CSV with a header row; numeric body.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};
CsvTable read_csv(const std::string& path);
void write_csv(const std::string& path, const CsvTable& table);

}  // namespace ctrb
