#pragma once

#include <array>
#include <optional>
#include <string_view>
#include <vector>

#include "shiftcraft/image.hpp"

namespace shiftcraft {

// Per-pixel gradient magnitude and orientation. Magnitude is non-negative and
// inherits the scale of the input (raw Sobel responses can exceed 1);
// orientation is the gradient direction folded into [0, pi), 0 where the
// magnitude vanishes.
struct GradientField {
    int width = 0;
    int height = 0;
    std::vector<double> magnitude;
    std::vector<double> orientation;

    double mag(int x, int y) const { return magnitude[static_cast<std::size_t>(y) * width + x]; }
    double ori(int x, int y) const { return orientation[static_cast<std::size_t>(y) * width + x]; }
};

enum class ThresholdMethod { otsu, yen, li, isodata, mean };

constexpr std::array<ThresholdMethod, 5> kAllThresholdMethods = {
    ThresholdMethod::otsu, ThresholdMethod::yen, ThresholdMethod::li,
    ThresholdMethod::isodata, ThresholdMethod::mean};

std::string_view to_string(ThresholdMethod m);
std::optional<ThresholdMethod> threshold_method_from_string(std::string_view name);

// Luma conversion, 0.299 R + 0.587 G + 0.114 B. Gray input passes through.
GrayImage to_grayscale(const Image& img);

// Separable Gaussian convolution with reflect-101 borders. sigma == 0 returns
// the input unchanged. Kernel radius is 2 for sigma == 1.0 (5-tap) and
// ceil(3 sigma) otherwise; weights are normalized to sum 1.
GrayImage gaussian_blur(const GrayImage& img, double sigma);

// 3x3 Sobel with reflect-101 borders; requires width, height >= 3.
GradientField sobel_gradients(const GrayImage& img);

// Thins a gradient field: orientation is quantized to 4 directions and a
// pixel survives (at its original magnitude) iff it is >= both neighbors
// along the quantized gradient direction. Out-of-bounds neighbors are skipped.
GrayImage nonmax_suppress(const GradientField& grad);

// Global threshold in [0, 1] on a 256-bin histogram (mean uses the raw pixel
// values). A constant image returns that constant for every method. Histogram
// methods break ties between equally good cut points by taking the midpoint
// of the maximizing plateau.
double compute_threshold(const GrayImage& img, ThresholdMethod method);

// Double thresholding: pixels >= high are on, pixels in [low, high) are on
// iff 8-connected to a strong pixel through weak/strong pixels.
BinaryMap hysteresis(const GrayImage& mag, double low, double high);

// Clears 8-connected components with fewer than min_area on-pixels.
BinaryMap remove_small_components(const BinaryMap& bmap, int min_area);

// 8-connected component labels (0 = off pixel, components numbered from 1)
// plus per-component areas. Shared by hysteresis/pruning and reused by tests.
struct ComponentLabels {
    std::vector<int> label;  // size width*height
    std::vector<int> area;   // area[i] = pixels of component i+1
};
ComponentLabels label_components(const BinaryMap& bmap);

}  // namespace shiftcraft
