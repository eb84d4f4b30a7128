#include <hmax/binary_io.h>
#include <hmax/error.h>

#include <array>
#include <bit>
#include <cstring>
#include <istream>
#include <ostream>

namespace hmax::io {

namespace {

template <typename U>
void put(std::ostream& os, U v) {
    std::array<char, sizeof(U)> buf;
    for (std::size_t i = 0; i < sizeof(U); ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    os.write(buf.data(), buf.size());
    if (!os) throw Error("write failed");
}

template <typename U>
U get(std::istream& is) {
    std::array<unsigned char, sizeof(U)> buf;
    is.read(reinterpret_cast<char*>(buf.data()), buf.size());
    if (!is) throw Error("unexpected end of file");
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(buf[i]) << (8 * i);
    return v;
}

}  // namespace

void write_magic(std::ostream& os, std::string_view magic) {
    os.write(magic.data(), static_cast<std::streamsize>(magic.size()));
    if (!os) throw Error("write failed");
}

void expect_magic(std::istream& is, std::string_view magic, std::string_view what) {
    std::string got(magic.size(), '\0');
    is.read(got.data(), static_cast<std::streamsize>(got.size()));
    if (!is || got != magic) throw Error("not a " + std::string(what) + " file");
}

void write_u32(std::ostream& os, std::uint32_t v) { put(os, v); }
void write_u64(std::ostream& os, std::uint64_t v) { put(os, v); }
void write_f32(std::ostream& os, float v) { put(os, std::bit_cast<std::uint32_t>(v)); }
void write_f64(std::ostream& os, double v) { put(os, std::bit_cast<std::uint64_t>(v)); }

void write_string(std::ostream& os, const std::string& s) {
    write_u32(os, static_cast<std::uint32_t>(s.size()));
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
    if (!os) throw Error("write failed");
}

std::uint32_t read_u32(std::istream& is) { return get<std::uint32_t>(is); }
std::uint64_t read_u64(std::istream& is) { return get<std::uint64_t>(is); }
float read_f32(std::istream& is) { return std::bit_cast<float>(get<std::uint32_t>(is)); }
double read_f64(std::istream& is) { return std::bit_cast<double>(get<std::uint64_t>(is)); }

std::string read_string(std::istream& is) {
    const auto n = read_u32(is);
    if (n > (1u << 20)) throw Error("string length out of range");
    std::string s(n, '\0');
    is.read(s.data(), n);
    if (!is) throw Error("unexpected end of file");
    return s;
}

}  // namespace hmax::io
