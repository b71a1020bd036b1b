#include "mesochain/io.hpp"

#include "mesochain/error.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace mesochain {

std::string
format_double(double x)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void
write_text_file(const std::string& path, const std::string& contents)
{
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw IoError("cannot open " + path + " for writing");
  out << contents;
  if (!out)
    throw IoError("failed writing " + path);
}

std::string
read_text_file(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void
ensure_directory(const std::string& path)
{
  std::error_code ec;
  std::filesystem::create_directories(path, ec);
  if (ec)
    throw IoError("cannot create directory " + path + ": " + ec.message());
}

} // namespace mesochain
