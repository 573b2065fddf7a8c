#include "shiftcraft/bte.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace shiftcraft {

namespace {

void validate(const BteParams& p) {
    if (p.sigma < 0.0) throw std::invalid_argument("bte: negative sigma");
    if (p.threshold_noise <= 0.0 || p.bound_noise_low <= 0.0 || p.bound_noise_high <= 0.0) {
        throw std::invalid_argument("bte: noise factors must be positive");
    }
    if (p.min_area_fraction < 0.0 || p.min_area_fraction >= 1.0) {
        throw std::invalid_argument("bte: min_area_fraction outside [0, 1)");
    }
}

// Blurred Sobel magnitude normalized to [0,1]; zero map when flat.
GrayImage normalized_magnitude(const Image& img, double sigma) {
    const GrayImage gray = gaussian_blur(to_grayscale(img), sigma);
    const GradientField grad = sobel_gradients(gray);
    GrayImage mag(grad.width, grad.height);
    mag.data = grad.magnitude;
    const double mx = *std::max_element(mag.data.begin(), mag.data.end());
    if (mx > 0.0) {
        for (double& v : mag.data) v /= mx;
    }
    return mag;
}

}  // namespace

BinaryMap extract_bte(const Image& img, const BteParams& params) {
    validate(params);
    const GrayImage gray = gaussian_blur(to_grayscale(img), params.sigma);
    const GradientField grad = sobel_gradients(gray);

    GrayImage mag(grad.width, grad.height);
    mag.data = grad.magnitude;
    const double mx = *std::max_element(mag.data.begin(), mag.data.end());
    if (mx == 0.0) return BinaryMap(img.width, img.height);
    for (double& v : mag.data) v /= mx;

    const double t = compute_threshold(mag, params.method) * params.threshold_noise;
    const double low = 0.5 * t * params.bound_noise_low;
    const double high = 1.5 * t * params.bound_noise_high;

    GrayImage thin = nonmax_suppress(grad);
    for (double& v : thin.data) v /= mx;

    const BinaryMap edges = hysteresis(thin, low, high);
    const int min_area =
        static_cast<int>(std::lround(params.min_area_fraction * img.width * img.height));
    return remove_small_components(edges, min_area);
}

BinaryMap extract_bte_random(const Image& img, const BteRandomPolicy& policy, RandomStream& rng,
                             BteParams* drawn) {
    if (policy.sigma_choices.empty() || policy.method_choices.empty()) {
        throw std::invalid_argument("bte: empty choice set in policy");
    }
    if (policy.threshold_noise_lo > 1.0 || policy.threshold_noise_hi < 1.0 ||
        policy.bound_noise_lo > 1.0 || policy.bound_noise_hi < 1.0) {
        throw std::invalid_argument("bte: noise ranges must contain 1.0");
    }
    BteParams p;
    p.sigma = policy.sigma_choices[rng.uniform_int(static_cast<int>(policy.sigma_choices.size()))];
    p.method =
        policy.method_choices[rng.uniform_int(static_cast<int>(policy.method_choices.size()))];
    p.threshold_noise = rng.uniform(policy.threshold_noise_lo, policy.threshold_noise_hi);
    p.bound_noise_low = rng.uniform(policy.bound_noise_lo, policy.bound_noise_hi);
    p.bound_noise_high = rng.uniform(policy.bound_noise_lo, policy.bound_noise_hi);
    if (drawn) *drawn = p;
    return extract_bte(img, p);
}

GrayImage sobel_edge_map(const Image& img, double sigma) {
    return normalized_magnitude(img, sigma);
}

}  // namespace shiftcraft
