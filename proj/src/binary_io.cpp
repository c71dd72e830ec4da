#include "binary_io.hpp"

#include <bit>
#include <cstring>
#include <limits>

namespace lps::detail {

static_assert(std::numeric_limits<double>::is_iec559, "IEEE-754 doubles required");

void write_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xffu);
  os.write(reinterpret_cast<const char*>(b), 4);
}

void write_f64(std::ostream& os, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xffu);
  os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint32_t decode_u32(const unsigned char* p) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

double decode_f64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return std::bit_cast<double>(v);
}

void write_header(std::ostream& os, const std::array<char, 4>& magic, const Dims& d) {
  constexpr auto kMax = std::numeric_limits<std::uint32_t>::max();
  if (d.nx > kMax || d.ny > kMax || d.nz > kMax)
    throw ValidationError("dimensions do not fit the 32-bit header fields: " + to_string(d));
  os.write(magic.data(), 4);
  write_u32(os, kFormatVersion);
  write_u32(os, static_cast<std::uint32_t>(d.nx));
  write_u32(os, static_cast<std::uint32_t>(d.ny));
  write_u32(os, static_cast<std::uint32_t>(d.nz));
}

std::ifstream open_container(const std::filesystem::path& path,
                             const std::array<char, 4>& magic, Dims& dims) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path.string() + "' for reading");

  unsigned char header[kHeaderBytes];
  is.read(reinterpret_cast<char*>(header), kHeaderBytes);
  if (is.gcount() < 4 || std::memcmp(header, magic.data(), 4) != 0)
    throw FormatError("'" + path.string() + "': bad magic, expected " +
                      std::string(magic.data(), 4));
  if (is.gcount() != static_cast<std::streamsize>(kHeaderBytes))
    throw FormatError("'" + path.string() + "': incomplete header");

  const auto version = decode_u32(header + 4);
  if (version != kFormatVersion)
    throw FormatError("'" + path.string() + "': unsupported version " + std::to_string(version));

  dims.nx = decode_u32(header + 8);
  dims.ny = decode_u32(header + 12);
  dims.nz = decode_u32(header + 16);
  if (dims.nx == 0 || dims.ny == 0 || dims.nz == 0)
    throw FormatError("'" + path.string() + "': zero dimension in header " + to_string(dims));
  return is;
}

void require_payload(std::ifstream& is, const std::filesystem::path& path, std::uintmax_t bytes) {
  const auto here = is.tellg();
  is.seekg(0, std::ios::end);
  const auto end = is.tellg();
  is.seekg(here);
  if (here < 0 || end < 0) throw IoError("'" + path.string() + "': cannot determine file size");
  const auto available = static_cast<std::uintmax_t>(end - here);
  if (available < bytes)
    throw TruncationError("'" + path.string() + "': header promises " + std::to_string(bytes) +
                          " payload bytes, file holds " + std::to_string(available));
}

}  // namespace lps::detail
