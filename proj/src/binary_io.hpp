// Shared container header for the .lpsv/.lpsm files.
#pragma once

#include "lps/core.hpp"

#include <array>
#include <cstdint>
#include <fstream>

namespace lps::detail {

constexpr std::uint32_t kFormatVersion = 1;
constexpr std::array<char, 4> kVolumeMagic{'L', 'P', 'S', 'V'};
constexpr std::array<char, 4> kMaskMagic{'L', 'P', 'S', 'M'};
constexpr std::size_t kHeaderBytes = 20;

void write_header(std::ostream& os, const std::array<char, 4>& magic, const Dims& d);

/// Opens `path` and validates magic, version and dimensions. On return the
/// stream is positioned at the first payload byte.
std::ifstream open_container(const std::filesystem::path& path,
                             const std::array<char, 4>& magic, Dims& dims);

/// Throws TruncationError unless at least `bytes` remain in `is`.
void require_payload(std::ifstream& is, const std::filesystem::path& path, std::uintmax_t bytes);

void write_u32(std::ostream& os, std::uint32_t v);
void write_f64(std::ostream& os, double v);
std::uint32_t decode_u32(const unsigned char* p);
double decode_f64(const unsigned char* p);

}  // namespace lps::detail
