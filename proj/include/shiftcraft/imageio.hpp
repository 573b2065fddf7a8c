#pragma once

#include <string>

#include "shiftcraft/image.hpp"

namespace shiftcraft {

// Reads PNG, PGM, or PPM by file extension. Gray sources load as 1 channel,
// color as 3; 16-bit PNM depths are rejected. Failures throw std::runtime_error.
Image read_image(const std::string& path);

// Writes 8-bit PNG (.png), PGM (.pgm, 1 channel), or PPM (.ppm, 3 channels)
// by file extension.
void write_image(const Image& img, const std::string& path);

// Binary map as an 8-bit 0/255 single-channel image.
void write_image(const BinaryMap& map, const std::string& path);

}  // namespace shiftcraft
