#pragma once

#include <string>
#include <vector>

#include "metaenc/tensor.hpp"

namespace metaenc {

/// Binary 8-bit PGM (P5). Values are clamped to [0,1] and scaled to 0..255.
void write_pgm(const std::string& path, const Tensor& image, std::size_t rows,
               std::size_t cols);

/// Horizontal grid of equally sized images separated by a 1px divider.
void write_pgm_grid(const std::string& path, const std::vector<Tensor>& images,
                    std::size_t rows, std::size_t cols);

}  // namespace metaenc
