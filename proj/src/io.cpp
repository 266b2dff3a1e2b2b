#include <bergamot/io.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <bergamot/errors.hpp>

namespace bergamot {

std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_table(const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows) {
  std::string out;
  auto emit = [&out](const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  emit(header);
  for (const auto& row : rows) {
    require(row.size() == header.size(), errc::invalid_argument,
            "csv row width does not match the header");
    emit(row);
  }
  return out;
}

void write_outputs(const std::string& dir, const std::vector<OutputFile>& files) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  require(!ec, errc::io, "cannot create output directory " + dir + ": " + ec.message());
  for (const OutputFile& f : files) {
    const std::string path = dir + "/" + f.name;
    std::ofstream os(path, std::ios::binary);
    os.write(f.content.data(), static_cast<std::streamsize>(f.content.size()));
    require(os.good(), errc::io, "cannot write " + path);
  }
}

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  require(is.good(), errc::io, "cannot read " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

uint64_t fnv1a64(std::string_view data) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex64(uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace bergamot
