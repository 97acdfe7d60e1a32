#pragma once

#include <cstdint>
#include <string>

#include "metaenc/model.hpp"

namespace metaenc {

/// On-disk model format: magic "MAE1", little-endian u32 header length, JSON
/// header (version, mode, dims, solver config, seed, config digest), then the
/// parameter payload as little-endian doubles in flat order (decoder first).
struct Checkpoint {
    AutoencoderModel model;
    std::uint64_t seed = 0;
    std::string config_digest;
    int version = 1;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace metaenc
