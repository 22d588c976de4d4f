#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "aglsec/tensor.hpp"

namespace aglsec {

// Flat binary parameter container. Layout: magic "AGLS", version u32, then
// one record per parameter (u32 name length, name bytes, u32 rank, u64 dims,
// little-endian f64 payload) until end of data. Doubles survive a round trip
// bit for bit.
inline constexpr std::uint32_t kParameterFormatVersion = 1;

std::string serialize_parameters(const ParameterStore& store);

// Parses a byte string produced by serialize_parameters. Replaces the
// store's contents. Malformed or truncated input raises FormatError.
ParameterStore parse_parameters(std::string_view bytes);

void save_parameters(const std::filesystem::path& path, const ParameterStore& store);
ParameterStore load_parameters(const std::filesystem::path& path);

// Little-endian scalar helpers shared with the corrector checkpoint, which
// embeds a parameter blob behind its own header.
void append_u32(std::string& out, std::uint32_t v);
void append_u64(std::string& out, std::uint64_t v);
void append_f64(std::string& out, double v);

// Cursor-style readers; each advances `offset` and raises FormatError past
// the end of `bytes`.
std::uint32_t read_u32(std::string_view bytes, std::size_t& offset);
std::uint64_t read_u64(std::string_view bytes, std::size_t& offset);
double read_f64(std::string_view bytes, std::size_t& offset);
std::string read_bytes(std::string_view bytes, std::size_t& offset, std::size_t count);

}  // namespace aglsec
