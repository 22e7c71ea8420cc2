#pragma once

// Thermal video in Kelvin: a frame sequence with geometry and timing. Frame f
// carries the implicit timestamp f * sample_period. Values are 32-bit floats,
// matching the on-disk container payload.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace tirv {

struct ThermalVideo {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    double sample_period = 0.0;              ///< seconds between frames
    std::vector<std::vector<float>> frames;  ///< each height*width, row-major

    [[nodiscard]] std::size_t frame_count() const { return frames.size(); }
    [[nodiscard]] std::size_t pixel_count() const {
        return static_cast<std::size_t>(width) * height;
    }

    [[nodiscard]] float at(std::size_t frame, std::uint32_t x, std::uint32_t y) const {
        if (frame >= frames.size() || x >= width || y >= height)
            throw std::out_of_range("ThermalVideo::at: index out of range");
        return frames[frame][static_cast<std::size_t>(y) * width + x];
    }

    float& at(std::size_t frame, std::uint32_t x, std::uint32_t y) {
        if (frame >= frames.size() || x >= width || y >= height)
            throw std::out_of_range("ThermalVideo::at: index out of range");
        return frames[frame][static_cast<std::size_t>(y) * width + x];
    }

    void validate() const {
        if (width == 0 || height == 0)
            throw std::invalid_argument("ThermalVideo: empty geometry");
        if (!(sample_period > 0.0) || !std::isfinite(sample_period))
            throw std::invalid_argument("ThermalVideo: sample_period must be > 0");
        for (const auto& f : frames) {
            if (f.size() != pixel_count())
                throw std::invalid_argument("ThermalVideo: frame size does not match geometry");
            for (float v : f)
                if (!std::isfinite(v))
                    throw std::invalid_argument("ThermalVideo: temperatures must be finite");
        }
    }
};

}  // namespace tirv
