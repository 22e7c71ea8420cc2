#pragma once

// The TIRV container: a bit-exact binary format for Kelvin-valued thermal
// video with timing metadata. Little-endian throughout.
//
//   offset  size  field
//   0       4     magic "TIRV"
//   4       4     version (u32, currently 1)
//   8       4     width (u32)
//   12      4     height (u32)
//   16      4     frame_count (u32)
//   20      8     sample_period_s (f64)
//   28      8     tau_s (f64)
//   36      -     payload: frame_count * height * width little-endian f32,
//                 frame-major then row-major; exactly 4*w*h*f bytes

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "tirv/video.hpp"

namespace tirv {

enum class TirvErrorKind {
    io,
    bad_magic,
    unsupported_version,
    truncated_payload,
    length_mismatch,
};

class TirvError : public std::runtime_error {
public:
    TirvError(TirvErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}
    [[nodiscard]] TirvErrorKind kind() const { return kind_; }

private:
    TirvErrorKind kind_;
};

namespace detail {

constexpr std::size_t kTirvHeaderSize = 36;
constexpr std::uint32_t kTirvVersion = 1;

inline void put_u32(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
    out.push_back(static_cast<char>((v >> 16) & 0xff));
    out.push_back(static_cast<char>((v >> 24) & 0xff));
}

inline void put_u64(std::string& out, std::uint64_t v) {
    put_u32(out, static_cast<std::uint32_t>(v & 0xffffffffULL));
    put_u32(out, static_cast<std::uint32_t>(v >> 32));
}

inline std::uint32_t get_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline std::uint64_t get_u64(const unsigned char* p) {
    return static_cast<std::uint64_t>(get_u32(p)) |
           (static_cast<std::uint64_t>(get_u32(p + 4)) << 32);
}

}  // namespace detail

/// A parsed container: the video plus the camera's thermal time constant.
struct TirvFile {
    ThermalVideo video;
    double tau_s = 0.0;
};

/// Serialize to the TIRV byte layout.
inline std::string encode_tirv(const ThermalVideo& video, double tau_s) {
    video.validate();
    if (video.frame_count() > 0xffffffffULL)
        throw std::invalid_argument("encode_tirv: too many frames");

    std::string out;
    out.reserve(detail::kTirvHeaderSize + 4 * video.pixel_count() * video.frame_count());
    out += "TIRV";
    detail::put_u32(out, detail::kTirvVersion);
    detail::put_u32(out, video.width);
    detail::put_u32(out, video.height);
    detail::put_u32(out, static_cast<std::uint32_t>(video.frame_count()));
    detail::put_u64(out, std::bit_cast<std::uint64_t>(video.sample_period));
    detail::put_u64(out, std::bit_cast<std::uint64_t>(tau_s));
    for (const auto& frame : video.frames)
        for (float v : frame) detail::put_u32(out, std::bit_cast<std::uint32_t>(v));
    return out;
}

/// Parse the TIRV byte layout; validates magic, version, and payload length.
inline TirvFile decode_tirv(const std::string& bytes) {
    if (bytes.size() < detail::kTirvHeaderSize) {
        if (bytes.size() < 4 || bytes.compare(0, 4, "TIRV") != 0)
            throw TirvError(TirvErrorKind::bad_magic, "not a TIRV file (bad magic)");
        throw TirvError(TirvErrorKind::truncated_payload, "TIRV header truncated");
    }
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    if (bytes.compare(0, 4, "TIRV") != 0)
        throw TirvError(TirvErrorKind::bad_magic, "not a TIRV file (bad magic)");
    const std::uint32_t version = detail::get_u32(p + 4);
    if (version != detail::kTirvVersion)
        throw TirvError(TirvErrorKind::unsupported_version,
                        "unsupported TIRV version " + std::to_string(version));

    TirvFile out;
    out.video.width = detail::get_u32(p + 8);
    out.video.height = detail::get_u32(p + 12);
    const std::uint32_t frame_count = detail::get_u32(p + 16);
    out.video.sample_period = std::bit_cast<double>(detail::get_u64(p + 20));
    out.tau_s = std::bit_cast<double>(detail::get_u64(p + 28));

    const std::uint64_t pixels =
        static_cast<std::uint64_t>(out.video.width) * out.video.height;
    if (pixels == 0)
        throw TirvError(TirvErrorKind::length_mismatch, "declared geometry is empty");
    if (frame_count > (std::uint64_t{1} << 62) / (4 * pixels))
        throw TirvError(TirvErrorKind::length_mismatch,
                        "declared dimensions overflow the payload size");
    const std::uint64_t expected = 4 * pixels * frame_count;
    const std::uint64_t actual = bytes.size() - detail::kTirvHeaderSize;
    if (actual < expected)
        throw TirvError(TirvErrorKind::truncated_payload,
                        "truncated payload: expected " + std::to_string(expected) +
                            " bytes, found " + std::to_string(actual));
    if (actual > expected)
        throw TirvError(TirvErrorKind::length_mismatch,
                        "payload length mismatch: expected " + std::to_string(expected) +
                            " bytes, found " + std::to_string(actual));

    out.video.frames.assign(frame_count, std::vector<float>(pixels, 0.0f));
    const unsigned char* cursor = p + detail::kTirvHeaderSize;
    for (auto& frame : out.video.frames)
        for (auto& v : frame) {
            v = std::bit_cast<float>(detail::get_u32(cursor));
            cursor += 4;
        }
    return out;
}

inline void write_tirv(const ThermalVideo& video, double tau_s, const std::string& path) {
    const std::string bytes = encode_tirv(video, tau_s);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw TirvError(TirvErrorKind::io, "cannot open for writing: " + path);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw TirvError(TirvErrorKind::io, "write failed: " + path);
}

inline TirvFile read_tirv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw TirvError(TirvErrorKind::io, "cannot open for reading: " + path);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw TirvError(TirvErrorKind::io, "read failed: " + path);
    return decode_tirv(bytes);
}

}  // namespace tirv
