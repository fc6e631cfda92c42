#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace omot {

// Grayscale instance-label image: pixel value = instance id, 0 = background.
struct LabelImage {
    int width = 0;
    int height = 0;
    std::vector<uint16_t> pixels;  // row-major

    uint16_t at(int u, int v) const { return pixels[static_cast<size_t>(v) * width + u]; }
};

// Reads an 8- or 16-bit grayscale PNG. Throws std::runtime_error on I/O or
// format problems.
LabelImage read_label_png(const std::string& path);

// Writes a 16-bit grayscale PNG.
void write_label_png(const std::string& path, const LabelImage& image);

}  // namespace omot
