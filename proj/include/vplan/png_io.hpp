#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vplan/latent.hpp"

namespace vplan {

// Minimal PNG support for the toy datasets: 8-bit greyscale or RGB, no
// interlacing. Enough to dump generated frames and re-import them.
struct PngImage {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    int channels = 1;  // 1 or 3
    std::vector<std::uint8_t> pixels;  // row-major, interleaved channels
};

void write_png(const std::string& path, const PngImage& image);
PngImage read_png(const std::string& path);

// Frame dump/import: values mapped between [-1, 1] and [0, 255].
void save_png_frames(const std::string& directory, const PixelVideo& video);
PixelVideo load_png_frames(const std::string& directory);

}  // namespace vplan
