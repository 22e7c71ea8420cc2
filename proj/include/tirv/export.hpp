#pragma once

// Frame and trace exports: 16-bit binary PGM (P5) for frame images and
// locale-independent CSV for pixel time series.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "tirv/video.hpp"

namespace tirv {

namespace detail {

inline std::string format_float(float v) {
    std::array<char, 64> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc{}) throw std::runtime_error("format_float: conversion failed");
    return std::string(buf.data(), end);
}

inline std::string format_double(double v) {
    std::array<char, 64> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
    return std::string(buf.data(), end);
}

inline void write_file(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace detail

/// 16-bit binary PGM of one frame. Temperatures map linearly from
/// [window_min, window_max] onto [0, 65535] with clamping and round-half-up;
/// the window is recorded in a comment line. Samples are big-endian per the
/// PGM convention.
inline std::string encode_frame_pgm(std::span<const float> frame, std::uint32_t width,
                                    std::uint32_t height, double window_min,
                                    double window_max) {
    if (!(window_min < window_max))
        throw std::invalid_argument("encode_frame_pgm: need window_min < window_max");
    if (frame.size() != static_cast<std::size_t>(width) * height || frame.empty())
        throw std::invalid_argument("encode_frame_pgm: frame size does not match geometry");

    std::string out;
    out += "P5\n";
    out += "# kelvin_window " + detail::format_double(window_min) + " " +
           detail::format_double(window_max) + "\n";
    out += std::to_string(width) + " " + std::to_string(height) + "\n65535\n";
    out.reserve(out.size() + frame.size() * 2);
    for (float v : frame) {
        double t = (static_cast<double>(v) - window_min) / (window_max - window_min);
        t = std::min(1.0, std::max(0.0, t));
        const auto q = static_cast<std::uint32_t>(std::floor(t * 65535.0 + 0.5));
        out.push_back(static_cast<char>((q >> 8) & 0xff));
        out.push_back(static_cast<char>(q & 0xff));
    }
    return out;
}

inline void export_frame_pgm(const ThermalVideo& video, std::size_t frame,
                             double window_min, double window_max, const std::string& path) {
    if (frame >= video.frame_count())
        throw std::out_of_range("export_frame_pgm: frame index out of range");
    detail::write_file(path, encode_frame_pgm(video.frames[frame], video.width, video.height,
                                              window_min, window_max));
}

/// One named time series for multi-column CSV export; values may be absent
/// where a series is not defined (blank cell).
struct TraceColumn {
    std::string name;
    std::vector<std::optional<double>> values;
};

/// time,value CSV of one pixel across all frames.
inline std::string encode_pixel_trace_csv(const ThermalVideo& video, std::uint32_t x,
                                          std::uint32_t y) {
    if (x >= video.width || y >= video.height)
        throw std::out_of_range("encode_pixel_trace_csv: pixel out of bounds");
    std::string out = "time,value\n";
    for (std::size_t f = 0; f < video.frame_count(); ++f) {
        out += detail::format_double(static_cast<double>(f) * video.sample_period);
        out += ",";
        out += detail::format_float(video.at(f, x, y));
        out += "\n";
    }
    return out;
}

inline void export_pixel_trace_csv(const ThermalVideo& video, std::uint32_t x, std::uint32_t y,
                                   const std::string& path) {
    detail::write_file(path, encode_pixel_trace_csv(video, x, y));
}

/// Multi-column variant: a shared time column plus one column per series.
inline std::string encode_trace_csv(std::span<const double> times,
                                    std::span<const TraceColumn> columns) {
    for (const auto& c : columns)
        if (c.values.size() != times.size())
            throw std::invalid_argument("encode_trace_csv: column length mismatch");
    std::string out = "time";
    for (const auto& c : columns) {
        out += ",";
        out += c.name;
    }
    out += "\n";
    for (std::size_t i = 0; i < times.size(); ++i) {
        out += detail::format_double(times[i]);
        for (const auto& c : columns) {
            out += ",";
            if (c.values[i]) out += detail::format_double(*c.values[i]);
        }
        out += "\n";
    }
    return out;
}

inline void export_trace_csv(std::span<const double> times,
                             std::span<const TraceColumn> columns, const std::string& path) {
    detail::write_file(path, encode_trace_csv(times, columns));
}

}  // namespace tirv
