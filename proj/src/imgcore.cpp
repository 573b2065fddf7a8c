#include "shiftcraft/imgcore.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace shiftcraft {

namespace {

constexpr double kPi = 3.14159265358979323846;

constexpr int kHistBins = 256;

// Bins intensity v in [0,1] to the nearest 8-bit level, so v = i/255 lands
// exactly in bin i.
int bin_of(double v) {
    int b = static_cast<int>(std::lround(v * 255.0));
    if (b < 0) b = 0;
    if (b > 255) b = 255;
    return b;
}

std::array<double, kHistBins> histogram256(const GrayImage& img) {
    std::array<double, kHistBins> h{};
    for (double v : img.data) h[bin_of(v)] += 1.0;
    return h;
}

// argmax over cut points with plateau-midpoint tie-breaking: when several
// cuts attain the maximum, the midpoint of the first maximizing run is taken.
int argmax_plateau_mid(const std::vector<double>& crit, const std::vector<bool>& valid) {
    int best_lo = -1, best_hi = -1;
    double best = 0.0;
    for (int k = 0; k < static_cast<int>(crit.size()); ++k) {
        if (!valid[k]) continue;
        if (best_lo < 0 || crit[k] > best) {
            best = crit[k];
            best_lo = best_hi = k;
        } else if (crit[k] == best && best_hi == k - 1) {
            best_hi = k;
        }
    }
    if (best_lo < 0) return -1;
    return (best_lo + best_hi) / 2;
}

double threshold_otsu(const std::array<double, kHistBins>& hist) {
    double total = 0.0, total_sum = 0.0;
    for (int i = 0; i < kHistBins; ++i) {
        total += hist[i];
        total_sum += hist[i] * i;
    }
    std::vector<double> crit(kHistBins - 1, 0.0);
    std::vector<bool> valid(kHistBins - 1, false);
    double w0 = 0.0, sum0 = 0.0;
    for (int k = 0; k < kHistBins - 1; ++k) {
        w0 += hist[k];
        sum0 += hist[k] * k;
        const double w1 = total - w0;
        if (w0 <= 0.0 || w1 <= 0.0) continue;
        const double mu0 = sum0 / w0;
        const double mu1 = (total_sum - sum0) / w1;
        crit[k] = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
        valid[k] = true;
    }
    const int k = argmax_plateau_mid(crit, valid);
    return k < 0 ? 0.0 : k / 255.0;
}

double threshold_yen(const std::array<double, kHistBins>& hist) {
    double total = 0.0;
    for (double h : hist) total += h;
    std::array<double, kHistBins> p{};
    for (int i = 0; i < kHistBins; ++i) p[i] = hist[i] / total;

    std::vector<double> crit(kHistBins - 1, 0.0);
    std::vector<bool> valid(kHistBins - 1, false);
    double p1 = 0.0, p1sq = 0.0, allsq = 0.0;
    for (int i = 0; i < kHistBins; ++i) allsq += p[i] * p[i];
    for (int k = 0; k < kHistBins - 1; ++k) {
        p1 += p[k];
        p1sq += p[k] * p[k];
        const double p2sq = allsq - p1sq;
        if (p1 <= 0.0 || p1 >= 1.0 || p1sq <= 0.0 || p2sq <= 0.0) continue;
        crit[k] = 2.0 * std::log(p1 * (1.0 - p1)) - std::log(p1sq * p2sq);
        valid[k] = true;
    }
    const int k = argmax_plateau_mid(crit, valid);
    return k < 0 ? 0.0 : k / 255.0;
}

double threshold_isodata(const std::array<double, kHistBins>& hist) {
    // Ridler-Calvard fixed point on the histogram: t -> (mu_low + mu_high)/2.
    int lo = 0, hi = kHistBins - 1;
    while (hist[lo] == 0.0) ++lo;
    while (hist[hi] == 0.0) --hi;
    int k = (lo + hi) / 2;
    for (int iter = 0; iter < kHistBins; ++iter) {
        double w0 = 0.0, s0 = 0.0, w1 = 0.0, s1 = 0.0;
        for (int i = 0; i <= k; ++i) {
            w0 += hist[i];
            s0 += hist[i] * i;
        }
        for (int i = k + 1; i < kHistBins; ++i) {
            w1 += hist[i];
            s1 += hist[i] * i;
        }
        if (w0 == 0.0 || w1 == 0.0) break;
        const int next = static_cast<int>((s0 / w0 + s1 / w1) / 2.0);
        if (next == k) break;
        k = next;
    }
    return k / 255.0;
}

double threshold_li(const std::array<double, kHistBins>& hist) {
    // Li & Tam minimum cross-entropy iteration on histogram means.
    double total = 0.0, mean = 0.0;
    for (int i = 0; i < kHistBins; ++i) {
        total += hist[i];
        mean += hist[i] * (i / 255.0);
    }
    mean /= total;
    double t = mean;
    for (int iter = 0; iter < 100; ++iter) {
        double wb = 0.0, sb = 0.0, wf = 0.0, sf = 0.0;
        for (int i = 0; i < kHistBins; ++i) {
            const double v = i / 255.0;
            if (v <= t) {
                wb += hist[i];
                sb += hist[i] * v;
            } else {
                wf += hist[i];
                sf += hist[i] * v;
            }
        }
        if (wb == 0.0 || wf == 0.0) break;
        double mb = sb / wb;
        double mf = sf / wf;
        if (mb < 1e-12) mb = 1e-12;
        if (mf < 1e-12) mf = 1e-12;
        const double denom = std::log(mb) - std::log(mf);
        if (denom == 0.0) break;
        const double next = (mb - mf) / denom;
        if (std::abs(next - t) < 0.5 / 255.0) {
            t = next;
            break;
        }
        t = next;
    }
    return clamp01(t);
}

}  // namespace

std::string_view to_string(ThresholdMethod m) {
    switch (m) {
        case ThresholdMethod::otsu: return "otsu";
        case ThresholdMethod::yen: return "yen";
        case ThresholdMethod::li: return "li";
        case ThresholdMethod::isodata: return "isodata";
        case ThresholdMethod::mean: return "mean";
    }
    return "?";
}

std::optional<ThresholdMethod> threshold_method_from_string(std::string_view name) {
    for (ThresholdMethod m : kAllThresholdMethods) {
        if (to_string(m) == name) return m;
    }
    return std::nullopt;
}

GrayImage to_grayscale(const Image& img) {
    if (img.empty()) throw std::invalid_argument("to_grayscale: empty image");
    GrayImage out(img.width, img.height);
    if (img.channels == 1) {
        out.data = img.data;
        return out;
    }
    if (img.channels != 3) throw std::invalid_argument("to_grayscale: expected 1 or 3 channels");
    for (std::size_t p = 0; p < out.data.size(); ++p) {
        const double* px = &img.data[p * 3];
        out.data[p] = 0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2];
    }
    return out;
}

GrayImage gaussian_blur(const GrayImage& img, double sigma) {
    if (img.empty()) throw std::invalid_argument("gaussian_blur: empty image");
    if (sigma < 0.0) throw std::invalid_argument("gaussian_blur: negative sigma");
    if (sigma == 0.0) return img;

    const int radius = (sigma == 1.0) ? 2 : static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> kernel(2 * radius + 1);
    double sum = 0.0;
    for (int k = -radius; k <= radius; ++k) {
        kernel[k + radius] = std::exp(-0.5 * (k * k) / (sigma * sigma));
        sum += kernel[k + radius];
    }
    for (double& w : kernel) w /= sum;

    const int w = img.width, h = img.height;
    GrayImage tmp(w, h), out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k) {
                acc += kernel[k + radius] * img.at(reflect101(x + k, w), y);
            }
            tmp.at(x, y) = acc;
        }
    }
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k) {
                acc += kernel[k + radius] * tmp.at(x, reflect101(y + k, h));
            }
            out.at(x, y) = acc;
        }
    }
    return out;
}

GradientField sobel_gradients(const GrayImage& img) {
    if (img.width < 3 || img.height < 3) {
        throw std::invalid_argument("sobel_gradients: image smaller than 3x3");
    }
    const int w = img.width, h = img.height;
    GradientField out;
    out.width = w;
    out.height = h;
    out.magnitude.assign(static_cast<std::size_t>(w) * h, 0.0);
    out.orientation.assign(static_cast<std::size_t>(w) * h, 0.0);

    for (int y = 0; y < h; ++y) {
        const int ym = reflect101(y - 1, h), yp = reflect101(y + 1, h);
        for (int x = 0; x < w; ++x) {
            const int xm = reflect101(x - 1, w), xp = reflect101(x + 1, w);
            const double tl = img.at(xm, ym), tc = img.at(x, ym), tr = img.at(xp, ym);
            const double ml = img.at(xm, y), mr = img.at(xp, y);
            const double bl = img.at(xm, yp), bc = img.at(x, yp), br = img.at(xp, yp);
            const double gx = (tr + 2.0 * mr + br) - (tl + 2.0 * ml + bl);
            const double gy = (bl + 2.0 * bc + br) - (tl + 2.0 * tc + tr);
            const double mag = std::sqrt(gx * gx + gy * gy);
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            out.magnitude[i] = mag;
            if (mag > 0.0) {
                double theta = std::atan2(gy, gx);
                if (theta < 0.0) theta += kPi;
                if (theta >= kPi) theta -= kPi;
                out.orientation[i] = theta;
            }
        }
    }
    return out;
}

GrayImage nonmax_suppress(const GradientField& grad) {
    const int w = grad.width, h = grad.height;
    GrayImage out(w, h);
    // Neighbor offsets per quantized gradient direction (y grows downward).
    static constexpr int dx[4] = {1, 1, 0, -1};
    static constexpr int dy[4] = {0, 1, 1, 1};
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double m = grad.mag(x, y);
            if (m == 0.0) continue;
            const int bin = static_cast<int>(std::lround(grad.ori(x, y) / (kPi / 4.0))) % 4;
            bool keep = true;
            for (int side = -1; side <= 1; side += 2) {
                const int nx = x + side * dx[bin];
                const int ny = y + side * dy[bin];
                if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
                if (m < grad.mag(nx, ny)) {
                    keep = false;
                    break;
                }
            }
            if (keep) out.at(x, y) = m;
        }
    }
    return out;
}

double compute_threshold(const GrayImage& img, ThresholdMethod method) {
    if (img.empty()) throw std::invalid_argument("compute_threshold: empty image");
    const auto [mn, mx] = std::minmax_element(img.data.begin(), img.data.end());
    if (*mn == *mx) return *mn;  // degenerate constant image

    if (method == ThresholdMethod::mean) {
        double sum = 0.0;
        for (double v : img.data) sum += v;
        return sum / static_cast<double>(img.data.size());
    }
    const auto hist = histogram256(img);
    switch (method) {
        case ThresholdMethod::otsu: return threshold_otsu(hist);
        case ThresholdMethod::yen: return threshold_yen(hist);
        case ThresholdMethod::li: return threshold_li(hist);
        case ThresholdMethod::isodata: return threshold_isodata(hist);
        default: break;
    }
    throw std::logic_error("compute_threshold: unhandled method");
}

BinaryMap hysteresis(const GrayImage& mag, double low, double high) {
    if (low > high) throw std::invalid_argument("hysteresis: low > high");
    const int w = mag.width, h = mag.height;
    BinaryMap out(w, h);
    std::vector<std::pair<int, int>> stack;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (mag.at(x, y) >= high && !out.at(x, y)) {
                out.at(x, y) = 1;
                stack.emplace_back(x, y);
                while (!stack.empty()) {
                    const auto [cx, cy] = stack.back();
                    stack.pop_back();
                    for (int ny = cy - 1; ny <= cy + 1; ++ny) {
                        for (int nx = cx - 1; nx <= cx + 1; ++nx) {
                            if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
                            if (out.at(nx, ny)) continue;
                            if (mag.at(nx, ny) >= low) {
                                out.at(nx, ny) = 1;
                                stack.emplace_back(nx, ny);
                            }
                        }
                    }
                }
            }
        }
    }
    return out;
}

ComponentLabels label_components(const BinaryMap& bmap) {
    const int w = bmap.width, h = bmap.height;
    ComponentLabels cl;
    cl.label.assign(static_cast<std::size_t>(w) * h, 0);
    std::vector<std::pair<int, int>> stack;
    int next = 0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            if (!bmap.bits[i] || cl.label[i]) continue;
            ++next;
            int area = 0;
            cl.label[i] = next;
            stack.emplace_back(x, y);
            while (!stack.empty()) {
                const auto [cx, cy] = stack.back();
                stack.pop_back();
                ++area;
                for (int ny = cy - 1; ny <= cy + 1; ++ny) {
                    for (int nx = cx - 1; nx <= cx + 1; ++nx) {
                        if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
                        const std::size_t j = static_cast<std::size_t>(ny) * w + nx;
                        if (!bmap.bits[j] || cl.label[j]) continue;
                        cl.label[j] = next;
                        stack.emplace_back(nx, ny);
                    }
                }
            }
            cl.area.push_back(area);
        }
    }
    return cl;
}

BinaryMap remove_small_components(const BinaryMap& bmap, int min_area) {
    if (min_area < 0) throw std::invalid_argument("remove_small_components: negative min_area");
    if (min_area == 0) return bmap;
    const ComponentLabels cl = label_components(bmap);
    BinaryMap out = bmap;
    for (std::size_t i = 0; i < out.bits.size(); ++i) {
        if (out.bits[i] && cl.area[cl.label[i] - 1] < min_area) out.bits[i] = 0;
    }
    return out;
}

}  // namespace shiftcraft
