#include "omot/png_io.hpp"

#include <png.h>

#include <cstdio>
#include <memory>
#include <stdexcept>

namespace omot {

namespace {

struct FileCloser {
    void operator()(FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

}  // namespace

LabelImage read_label_png(const std::string& path) {
    FilePtr file(std::fopen(path.c_str(), "rb"));
    if (!file) throw std::runtime_error("png: cannot open " + path);

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw std::runtime_error("png: read struct allocation failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw std::runtime_error("png: info struct allocation failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("png: failed to read " + path);
    }

    png_init_io(png, file.get());
    png_read_info(png, info);

    const int width = static_cast<int>(png_get_image_width(png, info));
    const int height = static_cast<int>(png_get_image_height(png, info));
    const int color = png_get_color_type(png, info);
    const int depth = png_get_bit_depth(png, info);

    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (color & PNG_COLOR_MASK_COLOR) png_set_rgb_to_gray_fixed(png, 1, -1, -1);
    if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    if (depth < 16) {
        // Promote to a uniform 16-bit representation without value scaling.
        png_set_expand_16(png);
    }
    if (depth == 16) png_set_swap(png);  // PNG stores big-endian
    png_read_update_info(png, info);

    LabelImage img;
    img.width = width;
    img.height = height;
    img.pixels.assign(static_cast<size_t>(width) * height, 0);

    std::vector<png_bytep> rows(height);
    std::vector<uint16_t> raw(static_cast<size_t>(width) * height);
    for (int v = 0; v < height; ++v)
        rows[v] = reinterpret_cast<png_bytep>(raw.data() + static_cast<size_t>(v) * width);
    png_read_image(png, rows.data());
    png_destroy_read_struct(&png, &info, nullptr);

    // expand_16 scales 8-bit values by 257; undo it so ids stay ids.
    const bool expanded = depth < 16;
    for (size_t i = 0; i < raw.size(); ++i) {
        img.pixels[i] = expanded ? static_cast<uint16_t>(raw[i] / 257) : raw[i];
    }
    return img;
}

void write_label_png(const std::string& path, const LabelImage& image) {
    if (image.width <= 0 || image.height <= 0 ||
        image.pixels.size() != static_cast<size_t>(image.width) * image.height)
        throw std::runtime_error("png: inconsistent image dimensions");

    FilePtr file(std::fopen(path.c_str(), "wb"));
    if (!file) throw std::runtime_error("png: cannot create " + path);

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw std::runtime_error("png: write struct allocation failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw std::runtime_error("png: info struct allocation failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("png: failed to write " + path);
    }

    png_init_io(png, file.get());
    png_set_IHDR(png, info, image.width, image.height, 16, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_set_swap(png);

    std::vector<png_bytep> rows(image.height);
    for (int v = 0; v < image.height; ++v) {
        rows[v] = reinterpret_cast<png_bytep>(
            const_cast<uint16_t*>(image.pixels.data() + static_cast<size_t>(v) * image.width));
    }
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

}  // namespace omot
