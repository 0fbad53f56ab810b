#include "semret/binary_io.hpp"

#include "semret/error.hpp"

#include <bit>
#include <cstring>

namespace semret {

namespace {

static_assert(std::endian::native == std::endian::little,
              "binary artifacts are written in host order; big-endian hosts need byte swapping");

// Length prefixes larger than this are treated as corruption.
constexpr std::uint32_t kMaxStringBytes = 1u << 24;

} // namespace

BinaryWriter::BinaryWriter(const std::filesystem::path& path)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc)
{
    if (!out_) throw Error("cannot open " + path.string() + " for writing");
}

void BinaryWriter::raw(const void* data, std::size_t n)
{
    out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
}

void BinaryWriter::magic(std::string_view tag) { raw(tag.data(), tag.size()); }
void BinaryWriter::u32(std::uint32_t v) { raw(&v, sizeof v); }
void BinaryWriter::u64(std::uint64_t v) { raw(&v, sizeof v); }
void BinaryWriter::f32(float v) { raw(&v, sizeof v); }
void BinaryWriter::f64(double v) { raw(&v, sizeof v); }
void BinaryWriter::f32s(std::span<const float> v) { raw(v.data(), v.size_bytes()); }

void BinaryWriter::str(std::string_view s)
{
    u32(static_cast<std::uint32_t>(s.size()));
    raw(s.data(), s.size());
}

void BinaryWriter::finish()
{
    out_.flush();
    if (!out_) throw Error("write failed: " + path_.string());
}

BinaryReader::BinaryReader(const std::filesystem::path& path)
    : path_(path), in_(path, std::ios::binary)
{
    if (!in_) throw Error("cannot open " + path.string());
}

void BinaryReader::raw(void* data, std::size_t n)
{
    in_.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n)
        throw FormatError(path_.string() + ": truncated file");
}

void BinaryReader::expect_magic(std::string_view tag)
{
    std::string got(tag.size(), '\0');
    raw(got.data(), got.size());
    if (got != tag)
        throw FormatError(path_.string() + ": bad magic (expected " + std::string(tag) + ")");
}

std::uint32_t BinaryReader::u32()
{
    std::uint32_t v;
    raw(&v, sizeof v);
    return v;
}

std::uint64_t BinaryReader::u64()
{
    std::uint64_t v;
    raw(&v, sizeof v);
    return v;
}

float BinaryReader::f32()
{
    float v;
    raw(&v, sizeof v);
    return v;
}

double BinaryReader::f64()
{
    double v;
    raw(&v, sizeof v);
    return v;
}

void BinaryReader::f32s(std::span<float> out) { raw(out.data(), out.size_bytes()); }

std::string BinaryReader::str()
{
    const auto n = u32();
    if (n > kMaxStringBytes) throw FormatError(path_.string() + ": corrupt string length");
    std::string s(n, '\0');
    raw(s.data(), n);
    return s;
}

void BinaryReader::expect_end()
{
    if (in_.peek() != std::char_traits<char>::eof())
        throw FormatError(path_.string() + ": trailing bytes after payload");
}

} // namespace semret
