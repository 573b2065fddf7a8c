#include "shiftcraft/synthdata.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "shiftcraft/bte.hpp"
#include "shiftcraft/imgcore.hpp"
#include "shiftcraft/rng.hpp"

namespace shiftcraft {

namespace {

constexpr double kPi = 3.14159265358979323846;

// All generator magnitudes in one place.
constexpr double kBaseGray = 0.55;
constexpr double kTintAmp = 0.10;
constexpr double kGratingAmp = 0.22;
constexpr double kPhaseJitter = 0.3;
constexpr double kNoiseSigma = 0.035;
constexpr double kGlyphAlbedo = 0.08;
constexpr double kRotJitterDeg = 10.0;
constexpr double kScaleLo = 0.8, kScaleHi = 1.1;
constexpr double kTransJitterPx = 2.0;
constexpr double kHeavyNoiseAmp = 0.35;
constexpr double kEdgeFloor = 0.25;
constexpr double kJitterGainLo = 0.3, kJitterGainHi = 1.7;
constexpr double kJitterOffset = 0.25;
constexpr double kBlurShiftLo = 1.2, kBlurShiftHi = 2.2;

// Background tint directions, distinct rows of {-1, 0, +1}^3. The tint row
// is drawn per image, so tint is color variation only and carries no class
// signal; the class-correlated texture cue is the grating alone.
constexpr int kTint[7][3] = {{1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}, {1, 1, -1},
                             {1, -1, 1},  {-1, 1, 1},  {1, 1, 1}};

// The grating rides an opponent color axis that cancels exactly under the
// 0.299/0.587/0.114 grayscale projection, so edge extraction never sees it
// while channel-mixing corruptions destroy it.
constexpr double kChroma[3] = {1.0, -0.299 / 0.587, 0.0};

double seg_dist(double px, double py, double ax, double ay, double bx, double by) {
    const double vx = bx - ax, vy = by - ay;
    const double wx = px - ax, wy = py - ay;
    const double vv = vx * vx + vy * vy;
    double t = vv > 0.0 ? (wx * vx + wy * vy) / vv : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double dx = px - (ax + t * vx), dy = py - (ay + t * vy);
    return std::hypot(dx, dy);
}

// Stroke membership in glyph-local coordinates (roughly [-1, 1]^2).
bool glyph_member(int glyph, double u, double v) {
    const double r = std::hypot(u, v);
    switch (glyph) {
        case 0:  // ring
            return r >= 0.62 && r <= 0.78;
        case 1: {  // triangle outline
            double best = 1e9;
            double vx[3], vy[3];
            for (int i = 0; i < 3; ++i) {
                const double a = kPi / 2.0 + 2.0 * kPi * i / 3.0;
                vx[i] = 0.8 * std::cos(a);
                vy[i] = -0.8 * std::sin(a);
            }
            for (int i = 0; i < 3; ++i) {
                best = std::min(
                    best, seg_dist(u, v, vx[i], vy[i], vx[(i + 1) % 3], vy[(i + 1) % 3]));
            }
            return best <= 0.07;
        }
        case 2: {  // square outline
            const double m = std::max(std::abs(u), std::abs(v));
            return m >= 0.58 && m <= 0.72;
        }
        case 3:  // plus
            return (std::abs(u) <= 0.09 && std::abs(v) <= 0.80) ||
                   (std::abs(v) <= 0.09 && std::abs(u) <= 0.80);
        case 4:  // diagonal cross
            return std::abs(std::abs(u) - std::abs(v)) <= 0.09 &&
                   std::max(std::abs(u), std::abs(v)) <= 0.80;
        case 5: {  // five-spoke star
            if (r > 0.88) return false;
            double best = 1e9;
            for (int i = 0; i < 5; ++i) {
                const double a = kPi / 2.0 + 2.0 * kPi * i / 5.0;
                best = std::min(
                    best, seg_dist(u, v, 0.0, 0.0, 0.85 * std::cos(a), -0.85 * std::sin(a)));
            }
            return best <= 0.07;
        }
        case 6:  // three horizontal bars
            return std::abs(u) <= 0.75 && (std::abs(v + 0.55) <= 0.07 ||
                                           std::abs(v) <= 0.07 || std::abs(v - 0.55) <= 0.07);
        default:
            return false;
    }
}

double quantize8(double v) { return std::lround(clamp01(v) * 255.0) / 255.0; }

void validate(const SynthSpec& spec) {
    if (spec.class_count < 2 || spec.class_count > 7) {
        throw std::invalid_argument("synthdata: class_count must be in [2, 7]");
    }
    if (spec.image_size < 8) throw std::invalid_argument("synthdata: image_size too small");
    if (spec.per_class_train < 1 || spec.per_class_val < 1 || spec.per_class_test < 1) {
        throw std::invalid_argument("synthdata: per-class counts must be positive");
    }
    if (spec.texture_strength < 0.0 || spec.texture_strength > 1.0) {
        throw std::invalid_argument("synthdata: texture_strength outside [0, 1]");
    }
}

// One glyph instance. Shape jitter and pixel noise come from the shape
// stream; the tint row and grating phase jitter come from the texture stream.
Image render_instance(const SynthSpec& spec, int label, RandomStream& shape_rng,
                      RandomStream& texture_rng) {
    const int S = spec.image_size;
    const double ts = spec.texture_strength;

    const double rot = shape_rng.uniform(-kRotJitterDeg, kRotJitterDeg) * kPi / 180.0;
    const double scale = shape_rng.uniform(kScaleLo, kScaleHi);
    const double tx = shape_rng.uniform(-kTransJitterPx, kTransJitterPx);
    const double ty = shape_rng.uniform(-kTransJitterPx, kTransJitterPx);
    const int tint_row = texture_rng.uniform_int(7);
    // phase is pinned per class up to a small jitter, so the grating is an
    // in-domain-stable cue that image-level corruptions decorrelate
    const double phase = label * 2.0 * kPi / 7.0 +
                         kPhaseJitter * (2.0 * texture_rng.uniform() - 1.0);

    const double freq = 2.2 + 0.45 * label;
    const double theta = label * kPi / 7.0;
    const double co = std::cos(rot), si = std::sin(rot);

    Image img(S, S, 3);
    const double half = S / 2.0;
    for (int y = 0; y < S; ++y) {
        for (int x = 0; x < S; ++x) {
            const double u0 = (x + 0.5 - half) - tx;
            const double v0 = (y + 0.5 - half) - ty;
            const double gu = (co * u0 + si * v0) / (half * scale);
            const double gv = (-si * u0 + co * v0) / (half * scale);
            const bool on = glyph_member(label, gu, gv);

            const double grating =
                std::sin(2.0 * kPi * freq * (x * std::cos(theta) + y * std::sin(theta)) / S +
                         phase);
            for (int c = 0; c < 3; ++c) {
                double v;
                if (on) {
                    v = kGlyphAlbedo;
                } else {
                    v = kBaseGray + ts * kTintAmp * kTint[tint_row][c] +
                        ts * kGratingAmp * kChroma[c] * grating;
                }
                v += kNoiseSigma * shape_rng.normal();
                img.at(x, y, c) = quantize8(v);
            }
        }
    }
    return img;
}

std::vector<LabeledImage> generate_split(const SynthSpec& spec, std::string_view tag,
                                         int per_class) {
    const std::uint64_t tseed = spec.texture_seed ? spec.texture_seed : spec.seed;
    std::vector<LabeledImage> out;
    out.reserve(static_cast<std::size_t>(spec.class_count) * per_class);
    for (int c = 0; c < spec.class_count; ++c) {
        for (int k = 0; k < per_class; ++k) {
            RandomStream shape_rng(derive_seed(
                spec.seed, {hash_str("shape"), hash_str(tag), static_cast<std::uint64_t>(c),
                            static_cast<std::uint64_t>(k)}));
            RandomStream texture_rng(derive_seed(
                tseed, {hash_str("texture"), hash_str(tag), static_cast<std::uint64_t>(c),
                        static_cast<std::uint64_t>(k)}));
            LabeledImage li;
            li.image = render_instance(spec, c, shape_rng, texture_rng);
            li.label = c;
            li.id = std::string(tag) + "-c" + std::to_string(c) + "-" + std::to_string(k);
            out.push_back(std::move(li));
        }
    }
    return out;
}

// Level-exact inversion: i/255 -> (255-i)/255, a bitwise involution on
// quantized pixels.
void invert_levels(Image& img) {
    for (double& v : img.data) {
        const long i = std::lround(v * 255.0);
        v = static_cast<double>(255 - i) / 255.0;
    }
}

void apply_shift(Image& img, ShiftKind shift, RandomStream& rng) {
    switch (shift) {
        case ShiftKind::identity:
            return;
        case ShiftKind::invert:
            invert_levels(img);
            return;
        case ShiftKind::heavy_noise:
            for (double& v : img.data) {
                v = quantize8(v + rng.uniform(-kHeavyNoiseAmp, kHeavyNoiseAmp));
            }
            return;
        case ShiftKind::edge_only: {
            const GrayImage e = sobel_edge_map(img, 1.0);
            for (int y = 0; y < img.height; ++y) {
                for (int x = 0; x < img.width; ++x) {
                    const double v = e.at(x, y) >= kEdgeFloor ? quantize8(e.at(x, y)) : 0.0;
                    for (int c = 0; c < img.channels; ++c) img.at(x, y, c) = v;
                }
            }
            return;
        }
        case ShiftKind::color_jitter: {
            double gain[3], offset[3];
            for (int c = 0; c < 3; ++c) {
                gain[c] = rng.uniform(kJitterGainLo, kJitterGainHi);
                offset[c] = rng.uniform(-kJitterOffset, kJitterOffset);
            }
            for (int y = 0; y < img.height; ++y) {
                for (int x = 0; x < img.width; ++x) {
                    for (int c = 0; c < img.channels; ++c) {
                        img.at(x, y, c) = quantize8(img.at(x, y, c) * gain[c] + offset[c]);
                    }
                }
            }
            return;
        }
        case ShiftKind::blur_shift: {
            const double sigma = rng.uniform(kBlurShiftLo, kBlurShiftHi);
            GrayImage ch(img.width, img.height);
            for (int c = 0; c < img.channels; ++c) {
                for (int y = 0; y < img.height; ++y) {
                    for (int x = 0; x < img.width; ++x) ch.at(x, y) = img.at(x, y, c);
                }
                const GrayImage blurred = gaussian_blur(ch, sigma);
                for (int y = 0; y < img.height; ++y) {
                    for (int x = 0; x < img.width; ++x) {
                        img.at(x, y, c) = quantize8(blurred.at(x, y));
                    }
                }
            }
            return;
        }
    }
    throw std::invalid_argument("synthdata: unknown shift");
}

}  // namespace

std::string_view to_string(ShiftKind s) {
    switch (s) {
        case ShiftKind::identity: return "identity";
        case ShiftKind::invert: return "invert";
        case ShiftKind::heavy_noise: return "heavy_noise";
        case ShiftKind::edge_only: return "edge_only";
        case ShiftKind::color_jitter: return "color_jitter";
        case ShiftKind::blur_shift: return "blur_shift";
    }
    return "?";
}

std::optional<ShiftKind> shift_from_string(std::string_view name) {
    for (ShiftKind s : {ShiftKind::identity, ShiftKind::invert, ShiftKind::heavy_noise,
                        ShiftKind::edge_only, ShiftKind::color_jitter, ShiftKind::blur_shift}) {
        if (to_string(s) == name) return s;
    }
    return std::nullopt;
}

std::pair<std::vector<LabeledImage>, std::vector<LabeledImage>> generate_source(
    const SynthSpec& spec) {
    validate(spec);
    return {generate_split(spec, "train", spec.per_class_train),
            generate_split(spec, "val", spec.per_class_val)};
}

std::vector<LabeledImage> generate_target(const SynthSpec& spec, ShiftKind shift) {
    validate(spec);
    std::vector<LabeledImage> out = generate_split(spec, "target", spec.per_class_test);
    for (std::size_t i = 0; i < out.size(); ++i) {
        // The shift stream is derived without the shift kind, so targets of
        // different shifts are paired sample-for-sample.
        RandomStream rng(derive_seed(spec.seed, {hash_str("shiftrng"), hash_str(out[i].id)}));
        apply_shift(out[i].image, shift, rng);
        out[i].id = std::string(to_string(shift)) + "/" + out[i].id;
    }
    return out;
}

}  // namespace shiftcraft
