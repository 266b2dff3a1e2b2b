#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace bergamot {

// Shortest exact round-trip is not the goal here: 17 significant digits reproduce the
// double bit pattern and the string itself byte-for-byte across runs.
std::string fmt_g17(double v);

std::string csv_table(const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows);

struct OutputFile {
  std::string name;  // path relative to the output directory
  std::string content;
};

// Creates the directory and writes every file in one pass; callers accumulate content
// first so a failed run leaves no partial artifacts.
void write_outputs(const std::string& dir, const std::vector<OutputFile>& files);

std::string read_file(const std::string& path);

uint64_t fnv1a64(std::string_view data);
std::string hex64(uint64_t v);

}  // namespace bergamot
