#include "metaenc/pgm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "metaenc/errors.hpp"

namespace metaenc {

namespace {

unsigned char to_byte(double v) {
    return static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

void write_p5(const std::string& path, const std::vector<unsigned char>& px,
              std::size_t w, std::size_t h) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(path + ": cannot open for writing");
    out << "P5\n" << w << " " << h << "\n255\n";
    out.write(reinterpret_cast<const char*>(px.data()),
              static_cast<std::streamsize>(px.size()));
}

}  // namespace

void write_pgm(const std::string& path, const Tensor& image, std::size_t rows,
               std::size_t cols) {
    if (image.numel() != rows * cols)
        throw ShapeError("write_pgm: image size " + std::to_string(image.numel()) +
                         " != " + std::to_string(rows * cols));
    std::vector<unsigned char> px(rows * cols);
    for (std::size_t i = 0; i < px.size(); ++i) px[i] = to_byte(image.data[i]);
    write_p5(path, px, cols, rows);
}

void write_pgm_grid(const std::string& path, const std::vector<Tensor>& images,
                    std::size_t rows, std::size_t cols) {
    if (images.empty()) throw ConfigError("write_pgm_grid: no images");
    const std::size_t count = images.size();
    const std::size_t w = count * cols + (count - 1);
    std::vector<unsigned char> px(rows * w, 255);
    for (std::size_t k = 0; k < count; ++k) {
        if (images[k].numel() != rows * cols)
            throw ShapeError("write_pgm_grid: image " + std::to_string(k) + " has size " +
                             std::to_string(images[k].numel()));
        const std::size_t x0 = k * (cols + 1);
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < cols; ++j)
                px[i * w + x0 + j] = to_byte(images[k].data[i * cols + j]);
    }
    write_p5(path, px, w, rows);
}

}  // namespace metaenc
