#pragma once

// Independent reference implementations used to cross-check the library.
// Everything here favors the most literal formulation over efficiency and
// shares no code path with the implementations under test.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "shiftcraft/image.hpp"
#include "shiftcraft/rng.hpp"

namespace oracles {

using shiftcraft::BinaryMap;
using shiftcraft::GrayImage;

inline int bin_of(double v) {
    int b = static_cast<int>(std::lround(v * 255.0));
    return b < 0 ? 0 : (b > 255 ? 255 : b);
}

// All cut bins k in [0, 254] maximizing the between-class variance of the
// split {bins <= k} / {bins > k}, computed per cut from scratch.
inline std::vector<int> otsu_argmax_bins(const GrayImage& img) {
    std::vector<int> hist(256, 0);
    for (double v : img.data) hist[bin_of(v)]++;
    const double n = static_cast<double>(img.data.size());
    std::vector<double> crit(255, -1.0);
    for (int k = 0; k < 255; ++k) {
        double n0 = 0, n1 = 0, s0 = 0, s1 = 0;
        for (int b = 0; b <= k; ++b) {
            n0 += hist[b];
            s0 += hist[b] * (b / 255.0);
        }
        for (int b = k + 1; b < 256; ++b) {
            n1 += hist[b];
            s1 += hist[b] * (b / 255.0);
        }
        if (n0 == 0 || n1 == 0) continue;
        double w0 = n0 / n, w1 = n1 / n;
        double mu0 = s0 / n0, mu1 = s1 / n1;
        crit[k] = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
    }
    double best = *std::max_element(crit.begin(), crit.end());
    std::vector<int> arg;
    for (int k = 0; k < 255; ++k) {
        if (crit[k] == best) arg.push_back(k);
    }
    return arg;
}

// Direct dense 2-D convolution with reflect-101 borders; kernel is row-major
// kh x kw with odd sides, anchored at its center.
inline GrayImage conv2d_reflect(const GrayImage& img, const std::vector<double>& kernel, int kw,
                                int kh) {
    auto fold = [](int i, int n) {
        if (n == 1) return 0;
        int period = 2 * (n - 1);
        i = ((i % period) + period) % period;
        return i < n ? i : period - i;
    };
    GrayImage out(img.width, img.height);
    const int rx = kw / 2, ry = kh / 2;
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            double acc = 0.0;
            for (int j = 0; j < kh; ++j) {
                for (int i = 0; i < kw; ++i) {
                    int sx = fold(x + i - rx, img.width);
                    int sy = fold(y + j - ry, img.height);
                    acc += kernel[static_cast<std::size_t>(j) * kw + i] * img.at(sx, sy);
                }
            }
            out.at(x, y) = acc;
        }
    }
    return out;
}

// Connected-component areas via an independent stack-free scan (iterative
// depth-first over an explicit worklist, seeded in raster order).
inline std::vector<int> component_areas_8(const BinaryMap& m) {
    std::vector<char> seen(m.bits.size(), 0);
    std::vector<int> areas;
    for (int y = 0; y < m.height; ++y) {
        for (int x = 0; x < m.width; ++x) {
            std::size_t idx = static_cast<std::size_t>(y) * m.width + x;
            if (!m.bits[idx] || seen[idx]) continue;
            int area = 0;
            std::vector<std::pair<int, int>> work{{x, y}};
            seen[idx] = 1;
            while (!work.empty()) {
                auto [cx, cy] = work.back();
                work.pop_back();
                ++area;
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        if (dx == 0 && dy == 0) continue;
                        int nx = cx + dx, ny = cy + dy;
                        if (nx < 0 || ny < 0 || nx >= m.width || ny >= m.height) continue;
                        std::size_t ni = static_cast<std::size_t>(ny) * m.width + nx;
                        if (m.bits[ni] && !seen[ni]) {
                            seen[ni] = 1;
                            work.emplace_back(nx, ny);
                        }
                    }
                }
            }
            areas.push_back(area);
        }
    }
    return areas;
}

// O(n^2) fractional ranks: rank_i = #less + (#equal + 1) / 2, 1-based.
inline std::vector<double> ranks_by_counting(const std::vector<double>& v) {
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        int less = 0, equal = 0;
        for (double u : v) {
            if (u < v[i]) ++less;
            if (u == v[i]) ++equal;
        }
        r[i] = less + (equal + 1) / 2.0;
    }
    return r;
}

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) throw std::invalid_argument("pearson: constant input");
    return sxy / std::sqrt(sxx * syy);
}

inline double spearman_brute(const std::vector<double>& x, const std::vector<double>& y) {
    return pearson(ranks_by_counting(x), ranks_by_counting(y));
}

inline GrayImage random_gray(int w, int h, std::uint64_t seed) {
    shiftcraft::RandomStream rng(seed);
    GrayImage g(w, h);
    for (double& v : g.data) v = rng.uniform();
    return g;
}

inline shiftcraft::Image random_rgb(int w, int h, std::uint64_t seed) {
    shiftcraft::RandomStream rng(seed);
    shiftcraft::Image img(w, h, 3);
    for (double& v : img.data) v = rng.uniform();
    return img;
}

}  // namespace oracles
