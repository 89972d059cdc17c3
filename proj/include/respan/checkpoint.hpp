#pragma once

#include <filesystem>
#include <stdexcept>

#include "respan/denoiser.hpp"

namespace respan {

// RPDC checkpoint: "RPDC" magic, u32 LE version = 1, u32 LE block count; then
// per block u16 LE name length, UTF-8 name, u32 LE rank, rank u32 LE dims,
// float32 LE payload. A leading "meta" block records the network shape and
// the input/conditioning variant flags.
class CheckpointError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

void save_checkpoint(const std::filesystem::path& path, const DenoiserParams& params);
DenoiserParams load_checkpoint(const std::filesystem::path& path);

} // namespace respan
