#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace semret {

/// Little-endian writer used by every binary artifact (models, embeddings,
/// indexes). Throws semret::Error when the file cannot be written.
class BinaryWriter {
public:
    explicit BinaryWriter(const std::filesystem::path& path);

    void magic(std::string_view tag);
    void u32(std::uint32_t v);
    void u64(std::uint64_t v);
    void f32(float v);
    void f64(double v);
    void f32s(std::span<const float> v);
    void str(std::string_view s);

    /// Flushes and checks the stream state.
    void finish();

private:
    void raw(const void* data, std::size_t n);

    std::filesystem::path path_;
    std::ofstream out_;
};

/// Reader counterpart; every short read raises semret::FormatError so a
/// truncated file never yields a partial object.
class BinaryReader {
public:
    explicit BinaryReader(const std::filesystem::path& path);

    void expect_magic(std::string_view tag);
    std::uint32_t u32();
    std::uint64_t u64();
    float f32();
    double f64();
    void f32s(std::span<float> out);
    std::string str();

    /// Throws unless the whole file has been consumed.
    void expect_end();

    const std::filesystem::path& path() const { return path_; }

private:
    void raw(void* data, std::size_t n);

    std::filesystem::path path_;
    std::ifstream in_;
};

} // namespace semret
