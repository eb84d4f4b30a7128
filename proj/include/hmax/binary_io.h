/**
 * @file binary_io.h
 * @brief Little-endian primitives for the on-disk formats.
 */
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>

namespace hmax::io {

void write_magic(std::ostream& os, std::string_view magic);
void expect_magic(std::istream& is, std::string_view magic, std::string_view what);

void write_u32(std::ostream& os, std::uint32_t v);
void write_u64(std::ostream& os, std::uint64_t v);
void write_f32(std::ostream& os, float v);
void write_f64(std::ostream& os, double v);
void write_string(std::ostream& os, const std::string& s);

std::uint32_t read_u32(std::istream& is);
std::uint64_t read_u64(std::istream& is);
float read_f32(std::istream& is);
double read_f64(std::istream& is);
std::string read_string(std::istream& is);

}  // namespace hmax::io
