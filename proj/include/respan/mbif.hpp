#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "respan/tensor.hpp"

namespace respan {

// MBIF: "MBI1" magic, u32 LE version = 1, u32 LE C/H/W, then C*H*W float32 LE
// payload, band-major and row-major within each band. Payload elements are
// float32, so writing quantizes the in-memory doubles; a tensor read from a
// file round-trips bit-identically.
class MbifError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

ImageTensor read_mbif(const std::filesystem::path& path);
void write_mbif(const ImageTensor& t, const std::filesystem::path& path);

} // namespace respan
