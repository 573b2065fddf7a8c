#pragma once

#include <array>
#include <vector>

#include "shiftcraft/image.hpp"
#include "shiftcraft/imgcore.hpp"
#include "shiftcraft/rng.hpp"

namespace shiftcraft {

// Parameters for one binary-thin-edge extraction. Noise factors are
// multiplicative; 1.0 everywhere gives the deterministic test-time pipeline.
struct BteParams {
    double sigma = 1.0;
    ThresholdMethod method = ThresholdMethod::otsu;
    double threshold_noise = 1.0;
    double bound_noise_low = 1.0;
    double bound_noise_high = 1.0;
    double min_area_fraction = 2e-4;
};

// Randomization policy for training-time extraction.
struct BteRandomPolicy {
    std::vector<double> sigma_choices = {0.0, 1.0, 2.0};
    std::vector<ThresholdMethod> method_choices = {
        ThresholdMethod::yen, ThresholdMethod::otsu, ThresholdMethod::isodata,
        ThresholdMethod::li, ThresholdMethod::mean};
    double threshold_noise_lo = 0.8, threshold_noise_hi = 1.2;
    double bound_noise_lo = 0.9, bound_noise_hi = 1.1;
};

// grayscale -> blur(sigma) -> Sobel -> threshold t on the magnitude map
// (before thinning) -> non-max suppression -> hysteresis [0.5t, 1.5t] with
// noise factors -> prune components below min_area_fraction of the image.
BinaryMap extract_bte(const Image& img, const BteParams& params);

// Samples sigma, method, and the three noise factors from the policy, then
// runs extract_bte. Draw order: sigma, method, threshold, bound low, bound
// high. The drawn parameters are reported through `drawn` when non-null.
BinaryMap extract_bte_random(const Image& img, const BteRandomPolicy& policy, RandomStream& rng,
                             BteParams* drawn = nullptr);

// Non-binarized variant: blurred Sobel magnitude rescaled to [0,1] by its max.
GrayImage sobel_edge_map(const Image& img, double sigma);

}  // namespace shiftcraft
