#include "shiftcraft/augment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "shiftcraft/bte.hpp"
#include "shiftcraft/imgcore.hpp"

namespace shiftcraft {

namespace {

constexpr double kPi = 3.14159265358979323846;

using TransformFn = Image (*)(const Image&, const AugmentationSpec&, RandomStream&);

struct RegistryEntry {
    SpecTemplate tmpl;
    TransformFn fn;
};

// Bilinear sample at a real coordinate; integer neighbors are folded back
// into the raster by reflection, so any (fx, fy) is valid.
double sample_reflect(const Image& img, double fx, double fy, int c) {
    const int x0 = static_cast<int>(std::floor(fx));
    const int y0 = static_cast<int>(std::floor(fy));
    const double ax = fx - x0, ay = fy - y0;
    const int xs[2] = {reflect101(x0, img.width), reflect101(x0 + 1, img.width)};
    const int ys[2] = {reflect101(y0, img.height), reflect101(y0 + 1, img.height)};
    const double top = (1.0 - ax) * img.at(xs[0], ys[0], c) + ax * img.at(xs[1], ys[0], c);
    const double bot = (1.0 - ax) * img.at(xs[0], ys[1], c) + ax * img.at(xs[1], ys[1], c);
    return (1.0 - ay) * top + ay * bot;
}

// Applies an inverse coordinate map: out(x, y) = in(map(x, y)).
template <typename MapFn>
Image geometric_map(const Image& img, MapFn map) {
    Image out(img.width, img.height, img.channels);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const auto [fx, fy] = map(x, y);
            for (int c = 0; c < img.channels; ++c) {
                out.at(x, y, c) = clamp01(sample_reflect(img, fx, fy, c));
            }
        }
    }
    return out;
}

Image per_channel_blur(const Image& img, double sigma) {
    Image out(img.width, img.height, img.channels);
    GrayImage ch(img.width, img.height);
    for (int c = 0; c < img.channels; ++c) {
        for (int y = 0; y < img.height; ++y) {
            for (int x = 0; x < img.width; ++x) ch.at(x, y) = img.at(x, y, c);
        }
        const GrayImage blurred = gaussian_blur(ch, sigma);
        for (int y = 0; y < img.height; ++y) {
            for (int x = 0; x < img.width; ++x) out.at(x, y, c) = clamp01(blurred.at(x, y));
        }
    }
    return out;
}

bool too_small_for_edges(const Image& img) { return img.width < 3 || img.height < 3; }

// --- arithmetic ---

Image t_additive_gaussian_noise(const Image& img, const AugmentationSpec& s, RandomStream& rng) {
    const double amp = s.param("amplitude");
    Image out = img;
    for (double& v : out.data) v = clamp01(v + amp * rng.normal());
    return out;
}

Image t_salt_and_pepper(const Image& img, const AugmentationSpec& s, RandomStream& rng) {
    const double frac = s.param("fraction");
    Image out = img;
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            if (rng.uniform() < frac) {
                const double v = rng.uniform() < 0.5 ? 0.0 : 1.0;
                for (int c = 0; c < img.channels; ++c) out.at(x, y, c) = v;
            }
        }
    }
    return out;
}

Image t_coarse_dropout(const Image& img, const AugmentationSpec& s, RandomStream& rng) {
    const double frac = s.param("fraction");
    const int rw = std::max(1, static_cast<int>(std::lround(0.1 * img.width)));
    const int rh = std::max(1, static_cast<int>(std::lround(0.1 * img.height)));
    const int n = std::max(
        1, static_cast<int>(std::lround(frac * img.width * img.height / (rw * rh))));
    Image out = img;
    for (int i = 0; i < n; ++i) {
        const int x0 = rng.uniform_int(img.width - rw + 1);
        const int y0 = rng.uniform_int(img.height - rh + 1);
        for (int y = y0; y < y0 + rh; ++y) {
            for (int x = x0; x < x0 + rw; ++x) {
                for (int c = 0; c < img.channels; ++c) out.at(x, y, c) = 0.0;
            }
        }
    }
    return out;
}

Image t_invert(const Image& img, const AugmentationSpec&, RandomStream&) {
    Image out = img;
    // level form keeps invert an exact involution on the 8-bit grid
    for (double& v : out.data) v = (255.0 - v * 255.0) / 255.0;
    return out;
}

Image t_multiply(const Image& img, const AugmentationSpec& s, RandomStream&) {
    const double f = s.param("factor");
    Image out = img;
    for (double& v : out.data) v = clamp01(v * f);
    return out;
}

// --- artistic ---

Image t_posterize(const Image& img, const AugmentationSpec& s, RandomStream&) {
    const int levels = std::max(2, static_cast<int>(std::lround(s.param("levels"))));
    Image out = img;
    const double steps = levels - 1.0;
    for (double& v : out.data) v = std::round(v * steps) / steps;
    return out;
}

Image t_solarize(const Image& img, const AugmentationSpec& s, RandomStream&) {
    const double thr = s.param("threshold");
    Image out = img;
    for (double& v : out.data) {
        if (v >= thr) v = 1.0 - v;
    }
    return out;
}

Image t_pencil_sketch(const Image& img, const AugmentationSpec& s, RandomStream&) {
    const double strength = s.param("strength");
    const GrayImage g = to_grayscale(img);
    const GrayImage b = gaussian_blur(g, 2.0);
    Image out = img;
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const double sketch = std::min(1.0, g.at(x, y) / (b.at(x, y) + 1e-3));
            for (int c = 0; c < img.channels; ++c) {
                out.at(x, y, c) = clamp01((1.0 - strength) * img.at(x, y, c) + strength * sketch);
            }
        }
    }
    return out;
}

// --- blur ---

Image t_gaussian_blur_aug(const Image& img, const AugmentationSpec& s, RandomStream&) {
    return per_channel_blur(img, s.param("sigma"));
}

Image t_box_blur(const Image& img, const AugmentationSpec& s, RandomStream&) {
    const int r = std::max(1, static_cast<int>(std::lround(s.param("radius"))));
    const double inv = 1.0 / (2 * r + 1);
    Image tmp(img.width, img.height, img.channels);
    Image out(img.width, img.height, img.channels);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            for (int c = 0; c < img.channels; ++c) {
                double acc = 0.0;
                for (int k = -r; k <= r; ++k) acc += img.at(reflect101(x + k, img.width), y, c);
                tmp.at(x, y, c) = acc * inv;
            }
        }
    }
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            for (int c = 0; c < img.channels; ++c) {
                double acc = 0.0;
                for (int k = -r; k <= r; ++k) acc += tmp.at(x, reflect101(y + k, img.height), c);
                out.at(x, y, c) = clamp01(acc * inv);
            }
        }
    }
    return out;
}

Image t_motion_blur(const Image& img, const AugmentationSpec& s, RandomStream&) {
    const int len = std::max(3, static_cast<int>(std::lround(s.param("length"))));
    const double angle = s.param("angle");
    const int r = len / 2;
    const double dx = std::cos(angle), dy = std::sin(angle);
    Image out(img.width, img.height, img.channels);
    const double inv = 1.0 / (2 * r + 1);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            for (int c = 0; c < img.channels; ++c) {
                double acc = 0.0;
                for (int k = -r; k <= r; ++k) {
                    acc += sample_reflect(img, x + k * dx, y + k * dy, c);
                }
                out.at(x, y, c) = clamp01(acc * inv);
            }
        }
    }
    return out;
}

// --- color ---

Image t_grayscale_blend(const Image& img, const AugmentationSpec& s, RandomStream&) {
    const double alpha = s.param("alpha");
    const GrayImage g = to_grayscale(img);
    Image out = img;
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            for (int c = 0; c < img.channels; ++c) {
                out.at(x, y, c) = clamp01(alpha * g.at(x, y) + (1.0 - alpha) * img.at(x, y, c));
            }
        }
    }
    return out;
}

Image t_channel_shuffle(const Image& img, const AugmentationSpec&, RandomStream& rng) {
    if (img.channels == 1) return img;
    int perm[3] = {0, 1, 2};
    rng.shuffle(perm, 3);
    Image out = img;
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            for (int c = 0; c < 3; ++c) out.at(x, y, c) = img.at(x, y, perm[c]);
        }
    }
    return out;
}

Image t_saturation(const Image& img, const AugmentationSpec& s, RandomStream&) {
    const double f = s.param("factor");
    const GrayImage g = to_grayscale(img);
    Image out = img;
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            for (int c = 0; c < img.channels; ++c) {
                out.at(x, y, c) = clamp01(g.at(x, y) + f * (img.at(x, y, c) - g.at(x, y)));
            }
        }
    }
    return out;
}

Image t_color_shift(const Image& img, const AugmentationSpec& s, RandomStream& rng) {
    const double ms = s.param("max_shift");
    double shift[3] = {0, 0, 0};
    for (int c = 0; c < img.channels; ++c) shift[c] = rng.uniform(-ms, ms);
    Image out = img;
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            for (int c = 0; c < img.channels; ++c) {
                out.at(x, y, c) = clamp01(img.at(x, y, c) + shift[c]);
            }
        }
    }
    return out;
}

// --- contrast ---

Image t_gamma_contrast(const Image& img, const AugmentationSpec& s, RandomStream&) {
    const double gamma = s.param("gamma");
    Image out = img;
    for (double& v : out.data) v = std::pow(v, gamma);
    return out;
}

Image t_linear_contrast(const Image& img, const AugmentationSpec& s, RandomStream&) {
    const double f = s.param("factor");
    Image out = img;
    for (double& v : out.data) v = clamp01(0.5 + f * (v - 0.5));
    return out;
}

Image t_sigmoid_contrast(const Image& img, const AugmentationSpec& s, RandomStream&) {
    const double gain = s.param("gain");
    auto sig = [gain](double v) { return 1.0 / (1.0 + std::exp(gain * (0.5 - v))); };
    const double s0 = sig(0.0), s1 = sig(1.0);
    Image out = img;
    for (double& v : out.data) v = clamp01((sig(v) - s0) / (s1 - s0));
    return out;
}

// --- convolutional ---

Image t_sharpen(const Image& img, const AugmentationSpec& s, RandomStream&) {
    const double strength = s.param("strength");
    const Image blurred = per_channel_blur(img, 1.0);
    Image out = img;
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        out.data[i] = clamp01(img.data[i] + strength * (img.data[i] - blurred.data[i]));
    }
    return out;
}

Image t_emboss(const Image& img, const AugmentationSpec& s, RandomStream&) {
    const double strength = s.param("strength");
    Image out = img;
    for (int y = 0; y < img.height; ++y) {
        const int ym = reflect101(y - 1, img.height), yp = reflect101(y + 1, img.height);
        for (int x = 0; x < img.width; ++x) {
            const int xm = reflect101(x - 1, img.width), xp = reflect101(x + 1, img.width);
            for (int c = 0; c < img.channels; ++c) {
                const double e = img.at(xp, yp, c) - img.at(xm, ym, c);
                const double embossed = clamp01(0.5 + e);
                out.at(x, y, c) =
                    clamp01((1.0 - strength) * img.at(x, y, c) + strength * embossed);
            }
        }
    }
    return out;
}

Image t_edge_detect_blend(const Image& img, const AugmentationSpec& s, RandomStream&) {
    if (too_small_for_edges(img)) return img;
    const double alpha = s.param("alpha");
    const GrayImage e = sobel_edge_map(img, 1.0);
    Image out = img;
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            for (int c = 0; c < img.channels; ++c) {
                out.at(x, y, c) = clamp01((1.0 - alpha) * img.at(x, y, c) + alpha * e.at(x, y));
            }
        }
    }
    return out;
}

// --- edges ---

Image t_edge_overlay(const Image& img, const AugmentationSpec& s, RandomStream&) {
    if (too_small_for_edges(img)) return img;
    const double alpha = s.param("alpha");
    const GrayImage e = sobel_edge_map(img, 1.0);
    Image out = img;
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            for (int c = 0; c < img.channels; ++c) {
                out.at(x, y, c) = clamp01(img.at(x, y, c) + alpha * e.at(x, y));
            }
        }
    }
    return out;
}

Image t_edge_canny_render(const Image& img, const AugmentationSpec& s, RandomStream&) {
    if (too_small_for_edges(img)) return img;
    const double alpha = s.param("alpha");
    const BinaryMap b = extract_bte(img, BteParams{});
    Image out = img;
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const double e = b.at(x, y) ? 1.0 : 0.0;
            for (int c = 0; c < img.channels; ++c) {
                out.at(x, y, c) = clamp01((1.0 - alpha) * img.at(x, y, c) + alpha * e);
            }
        }
    }
    return out;
}

Image t_contour_darken(const Image& img, const AugmentationSpec& s, RandomStream&) {
    if (too_small_for_edges(img)) return img;
    const double strength = s.param("strength");
    const GrayImage e = sobel_edge_map(img, 1.0);
    Image out = img;
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            for (int c = 0; c < img.channels; ++c) {
                out.at(x, y, c) = clamp01(img.at(x, y, c) * (1.0 - strength * e.at(x, y)));
            }
        }
    }
    return out;
}

// --- geometric ---

Image t_rotate(const Image& img, const AugmentationSpec& s, RandomStream&) {
    const double theta = s.param("angle_deg") * kPi / 180.0;
    const double cx = (img.width - 1) / 2.0, cy = (img.height - 1) / 2.0;
    const double co = std::cos(theta), si = std::sin(theta);
    return geometric_map(img, [&](int x, int y) {
        const double rx = x - cx, ry = y - cy;
        return std::pair{cx + co * rx + si * ry, cy - si * rx + co * ry};
    });
}

Image t_shear_x(const Image& img, const AugmentationSpec& s, RandomStream&) {
    const double sh = s.param("shear");
    const double cy = (img.height - 1) / 2.0;
    return geometric_map(
        img, [&](int x, int y) { return std::pair{x - sh * (y - cy), double(y)}; });
}

Image t_translate(const Image& img, const AugmentationSpec& s, RandomStream&) {
    const double dx = s.param("dx_frac") * img.width;
    const double dy = s.param("dy_frac") * img.height;
    return geometric_map(img, [&](int x, int y) { return std::pair{x - dx, y - dy}; });
}

Image t_scale(const Image& img, const AugmentationSpec& s, RandomStream&) {
    const double f = s.param("factor");
    const double cx = (img.width - 1) / 2.0, cy = (img.height - 1) / 2.0;
    return geometric_map(img, [&](int x, int y) {
        return std::pair{cx + (x - cx) / f, cy + (y - cy) / f};
    });
}

Image t_elastic_warp(const Image& img, const AugmentationSpec& s, RandomStream& rng) {
    const double amp = s.param("amplitude");
    GrayImage fx(img.width, img.height), fy(img.width, img.height);
    for (double& v : fx.data) v = rng.uniform(-1.0, 1.0);
    for (double& v : fy.data) v = rng.uniform(-1.0, 1.0);
    fx = gaussian_blur(fx, 6.0);
    fy = gaussian_blur(fy, 6.0);
    double mx = 0.0;
    for (double v : fx.data) mx = std::max(mx, std::abs(v));
    for (double v : fy.data) mx = std::max(mx, std::abs(v));
    if (mx > 0.0) {
        for (double& v : fx.data) v *= amp / mx;
        for (double& v : fy.data) v *= amp / mx;
    }
    return geometric_map(
        img, [&](int x, int y) { return std::pair{x + fx.at(x, y), y + fy.at(x, y)}; });
}

// --- segmentation ---

Image t_pixelate(const Image& img, const AugmentationSpec& s, RandomStream&) {
    const int block = std::max(2, static_cast<int>(std::lround(s.param("block"))));
    Image out(img.width, img.height, img.channels);
    for (int by = 0; by < img.height; by += block) {
        for (int bx = 0; bx < img.width; bx += block) {
            const int x1 = std::min(bx + block, img.width);
            const int y1 = std::min(by + block, img.height);
            const double inv = 1.0 / ((x1 - bx) * (y1 - by));
            for (int c = 0; c < img.channels; ++c) {
                double acc = 0.0;
                for (int y = by; y < y1; ++y) {
                    for (int x = bx; x < x1; ++x) acc += img.at(x, y, c);
                }
                const double mean = acc * inv;
                for (int y = by; y < y1; ++y) {
                    for (int x = bx; x < x1; ++x) out.at(x, y, c) = mean;
                }
            }
        }
    }
    return out;
}

struct Seed2D {
    double x, y;
};

Image average_by_nearest_seed(const Image& img, const std::vector<Seed2D>& seeds) {
    const int n = static_cast<int>(seeds.size());
    std::vector<int> assign(img.pixel_count());
    std::vector<double> acc(static_cast<std::size_t>(n) * img.channels, 0.0);
    std::vector<int> cnt(n, 0);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            int best = 0;
            double bd = 1e300;
            for (int i = 0; i < n; ++i) {
                const double dx = x - seeds[i].x, dy = y - seeds[i].y;
                const double d = dx * dx + dy * dy;
                if (d < bd) {
                    bd = d;
                    best = i;
                }
            }
            assign[static_cast<std::size_t>(y) * img.width + x] = best;
            ++cnt[best];
            for (int c = 0; c < img.channels; ++c) {
                acc[static_cast<std::size_t>(best) * img.channels + c] += img.at(x, y, c);
            }
        }
    }
    Image out(img.width, img.height, img.channels);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const int i = assign[static_cast<std::size_t>(y) * img.width + x];
            for (int c = 0; c < img.channels; ++c) {
                out.at(x, y, c) = acc[static_cast<std::size_t>(i) * img.channels + c] / cnt[i];
            }
        }
    }
    return out;
}

Image t_superpixel_average(const Image& img, const AugmentationSpec& s, RandomStream& rng) {
    const int cell = std::max(2, static_cast<int>(std::lround(s.param("cell"))));
    std::vector<Seed2D> seeds;
    for (int gy = 0; gy * cell < img.height; ++gy) {
        for (int gx = 0; gx * cell < img.width; ++gx) {
            const double jx = rng.uniform(-cell / 3.0, cell / 3.0);
            const double jy = rng.uniform(-cell / 3.0, cell / 3.0);
            seeds.push_back({gx * cell + cell / 2.0 + jx, gy * cell + cell / 2.0 + jy});
        }
    }
    return average_by_nearest_seed(img, seeds);
}

Image t_voronoi_average(const Image& img, const AugmentationSpec& s, RandomStream& rng) {
    const int n = std::max(1, static_cast<int>(std::lround(s.param("n_seeds"))));
    std::vector<Seed2D> seeds(n);
    for (Seed2D& sd : seeds) {
        sd.x = rng.uniform(0.0, img.width);
        sd.y = rng.uniform(0.0, img.height);
    }
    return average_by_nearest_seed(img, seeds);
}

// --- weather ---

Image t_fog(const Image& img, const AugmentationSpec& s, RandomStream& rng) {
    const double intensity = s.param("intensity");
    GrayImage field(img.width, img.height);
    for (double& v : field.data) v = rng.uniform();
    field = gaussian_blur(field, 10.0);
    const auto [mn, mx] = std::minmax_element(field.data.begin(), field.data.end());
    const double lo = *mn, span = *mx - *mn;
    Image out = img;
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const double f = span > 0.0 ? (field.at(x, y) - lo) / span : 0.5;
            const double a = intensity * f;
            for (int c = 0; c < img.channels; ++c) {
                out.at(x, y, c) = clamp01((1.0 - a) * img.at(x, y, c) + a);
            }
        }
    }
    return out;
}

Image t_snow(const Image& img, const AugmentationSpec& s, RandomStream& rng) {
    const double density = s.param("density");
    const int n = std::max(1, static_cast<int>(std::lround(density * img.pixel_count())));
    Image out = img;
    for (int i = 0; i < n; ++i) {
        const int cx = rng.uniform_int(img.width);
        const int cy = rng.uniform_int(img.height);
        const double r = rng.uniform(1.0, 2.5);
        const int ir = static_cast<int>(std::ceil(r));
        for (int y = std::max(0, cy - ir); y <= std::min(img.height - 1, cy + ir); ++y) {
            for (int x = std::max(0, cx - ir); x <= std::min(img.width - 1, cx + ir); ++x) {
                const double d = std::hypot(x - cx, y - cy);
                if (d > r) continue;
                const double a = 0.8 * (1.0 - d / r);
                for (int c = 0; c < img.channels; ++c) {
                    out.at(x, y, c) = clamp01((1.0 - a) * out.at(x, y, c) + a);
                }
            }
        }
    }
    return out;
}

Image t_rain(const Image& img, const AugmentationSpec& s, RandomStream& rng) {
    const double density = s.param("density");
    const int n = std::max(1, static_cast<int>(std::lround(density * img.pixel_count())));
    const double len = std::max(3.0, img.height / 8.0);
    Image out = img;
    for (int i = 0; i < n; ++i) {
        const double x0 = rng.uniform(0.0, img.width);
        const double y0 = rng.uniform(0.0, img.height);
        const double angle = (72.0 + rng.uniform(-5.0, 5.0)) * kPi / 180.0;
        const double dx = std::cos(angle), dy = std::sin(angle);
        for (double t = 0.0; t < len; t += 0.5) {
            const int x = static_cast<int>(std::lround(x0 + t * dx));
            const int y = static_cast<int>(std::lround(y0 + t * dy));
            if (x < 0 || x >= img.width || y < 0 || y >= img.height) continue;
            for (int c = 0; c < img.channels; ++c) {
                out.at(x, y, c) = clamp01(0.5 * out.at(x, y, c) + 0.5 * 0.75);
            }
        }
    }
    return out;
}

const std::vector<RegistryEntry>& entries() {
    using G = AugmentationGroup;
    static const std::vector<RegistryEntry> table = {
        {{G::arithmetic, "additive_gaussian_noise", {{"amplitude", 0.0, 0.15}}},
         t_additive_gaussian_noise},
        {{G::arithmetic, "salt_and_pepper", {{"fraction", 0.0, 0.08}}}, t_salt_and_pepper},
        {{G::arithmetic, "coarse_dropout", {{"fraction", 0.02, 0.15}}}, t_coarse_dropout},
        {{G::arithmetic, "invert", {}}, t_invert},
        {{G::arithmetic, "multiply", {{"factor", 0.6, 1.4}}}, t_multiply},

        {{G::artistic, "posterize", {{"levels", 2.0, 6.0}}}, t_posterize},
        {{G::artistic, "solarize", {{"threshold", 0.3, 0.7}}}, t_solarize},
        {{G::artistic, "pencil_sketch", {{"strength", 0.5, 1.0}}}, t_pencil_sketch},

        {{G::blur, "gaussian_blur", {{"sigma", 0.5, 2.5}}}, t_gaussian_blur_aug},
        {{G::blur, "box_blur", {{"radius", 1.0, 3.0}}}, t_box_blur},
        {{G::blur, "motion_blur", {{"length", 3.0, 9.0}, {"angle", 0.0, kPi}}}, t_motion_blur},

        {{G::color, "grayscale_blend", {{"alpha", 0.5, 1.0}}}, t_grayscale_blend},
        {{G::color, "channel_shuffle", {}}, t_channel_shuffle},
        {{G::color, "saturation", {{"factor", 0.3, 1.7}}}, t_saturation},
        {{G::color, "color_shift", {{"max_shift", 0.05, 0.25}}}, t_color_shift},

        {{G::contrast, "gamma_contrast", {{"gamma", 0.5, 2.0}}}, t_gamma_contrast},
        {{G::contrast, "linear_contrast", {{"factor", 0.5, 1.8}}}, t_linear_contrast},
        {{G::contrast, "sigmoid_contrast", {{"gain", 4.0, 10.0}}}, t_sigmoid_contrast},

        {{G::convolutional, "sharpen", {{"strength", 0.5, 1.5}}}, t_sharpen},
        {{G::convolutional, "emboss", {{"strength", 0.3, 1.0}}}, t_emboss},
        {{G::convolutional, "edge_detect_blend", {{"alpha", 0.2, 0.8}}}, t_edge_detect_blend},

        {{G::edges, "edge_overlay", {{"alpha", 0.3, 0.9}}}, t_edge_overlay},
        {{G::edges, "edge_canny_render", {{"alpha", 0.5, 1.0}}}, t_edge_canny_render},
        {{G::edges, "contour_darken", {{"strength", 0.3, 1.0}}}, t_contour_darken},

        {{G::geometric, "rotate", {{"angle_deg", -30.0, 30.0}}}, t_rotate},
        {{G::geometric, "shear_x", {{"shear", -0.3, 0.3}}}, t_shear_x},
        {{G::geometric, "translate", {{"dx_frac", -0.15, 0.15}, {"dy_frac", -0.15, 0.15}}},
         t_translate},
        {{G::geometric, "scale", {{"factor", 0.75, 1.3}}}, t_scale},
        {{G::geometric, "elastic_warp", {{"amplitude", 2.0, 8.0}}}, t_elastic_warp},

        {{G::segmentation, "pixelate", {{"block", 4.0, 16.0}}}, t_pixelate},
        {{G::segmentation, "superpixel_average", {{"cell", 8.0, 24.0}}}, t_superpixel_average},
        {{G::segmentation, "voronoi_average", {{"n_seeds", 20.0, 80.0}}}, t_voronoi_average},

        {{G::weather, "fog", {{"intensity", 0.2, 0.7}}}, t_fog},
        {{G::weather, "snow", {{"density", 0.001, 0.01}}}, t_snow},
        {{G::weather, "rain", {{"density", 0.0005, 0.004}}}, t_rain},
    };
    return table;
}

const RegistryEntry* find_entry(std::string_view name) {
    for (const RegistryEntry& e : entries()) {
        if (e.tmpl.name == name) return &e;
    }
    return nullptr;
}

}  // namespace

std::string_view to_string(AugmentationGroup g) {
    switch (g) {
        case AugmentationGroup::arithmetic: return "arithmetic";
        case AugmentationGroup::artistic: return "artistic";
        case AugmentationGroup::blur: return "blur";
        case AugmentationGroup::color: return "color";
        case AugmentationGroup::contrast: return "contrast";
        case AugmentationGroup::convolutional: return "convolutional";
        case AugmentationGroup::edges: return "edges";
        case AugmentationGroup::geometric: return "geometric";
        case AugmentationGroup::segmentation: return "segmentation";
        case AugmentationGroup::weather: return "weather";
    }
    return "?";
}

std::optional<AugmentationGroup> group_from_string(std::string_view name) {
    for (AugmentationGroup g : kAllGroups) {
        if (to_string(g) == name) return g;
    }
    return std::nullopt;
}

double AugmentationSpec::param(std::string_view key) const {
    for (const auto& [k, v] : params) {
        if (k == key) return v;
    }
    throw std::invalid_argument("augment: missing parameter '" + std::string(key) + "' for " +
                                name);
}

const std::vector<SpecTemplate>& registry() {
    static const std::vector<SpecTemplate> specs = [] {
        std::vector<SpecTemplate> out;
        for (const RegistryEntry& e : entries()) out.push_back(e.tmpl);
        return out;
    }();
    return specs;
}

std::vector<const SpecTemplate*> templates_for(AugmentationGroup g) {
    std::vector<const SpecTemplate*> out;
    for (const SpecTemplate& t : registry()) {
        if (t.group == g) out.push_back(&t);
    }
    return out;
}

const SpecTemplate* find_template(std::string_view name) {
    // points into registry() so callers can compare against its elements
    for (const SpecTemplate& t : registry()) {
        if (t.name == name) return &t;
    }
    return nullptr;
}

AugmentationSpec sample_spec(const SpecTemplate& tmpl, RandomStream& rng) {
    AugmentationSpec spec;
    spec.group = tmpl.group;
    spec.name = tmpl.name;
    for (const ParamRange& p : tmpl.params) {
        spec.params.emplace_back(p.name, rng.uniform(p.lo, p.hi));
    }
    return spec;
}

Image apply_basic(const Image& img, const BasicAugConfig& cfg, RandomStream& rng) {
    if (img.empty()) throw std::invalid_argument("apply_basic: empty image");
    const int W = img.width, H = img.height;
    const double area = static_cast<double>(W) * H;

    int cw = 0, ch = 0, cx0 = 0, cy0 = 0;
    bool found = false;
    for (int attempt = 0; attempt < 10 && !found; ++attempt) {
        const double target = area * rng.uniform(cfg.crop_scale_lo, cfg.crop_scale_hi);
        const double aspect = rng.uniform(cfg.aspect_lo, cfg.aspect_hi);
        const int w = static_cast<int>(std::lround(std::sqrt(target * aspect)));
        const int h = static_cast<int>(std::lround(std::sqrt(target / aspect)));
        if (w >= 1 && h >= 1 && w <= W && h <= H) {
            cw = w;
            ch = h;
            cx0 = rng.uniform_int(W - w + 1);
            cy0 = rng.uniform_int(H - h + 1);
            found = true;
        }
    }
    if (!found) {
        cw = ch = std::min(W, H);
        cx0 = (W - cw) / 2;
        cy0 = (H - ch) / 2;
    }

    Image crop(cw, ch, img.channels);
    for (int y = 0; y < ch; ++y) {
        for (int x = 0; x < cw; ++x) {
            for (int c = 0; c < img.channels; ++c) {
                crop.at(x, y, c) = img.at(cx0 + x, cy0 + y, c);
            }
        }
    }
    Image out = resize_bilinear(crop, cfg.out_size, cfg.out_size);
    if (rng.uniform() < cfg.hflip_prob) {
        for (int y = 0; y < out.height; ++y) {
            for (int x = 0; x < out.width / 2; ++x) {
                for (int c = 0; c < out.channels; ++c) {
                    std::swap(out.at(x, y, c), out.at(out.width - 1 - x, y, c));
                }
            }
        }
    }
    return out;
}

Image apply_extra(const Image& img, const AugmentationSpec& spec, RandomStream& rng) {
    if (img.empty()) throw std::invalid_argument("apply_extra: empty image");
    const RegistryEntry* e = find_entry(spec.name);
    if (!e || e->tmpl.group != spec.group) {
        throw std::invalid_argument("augment: unregistered spec '" + spec.name + "'");
    }
    Image out = e->fn(img, spec, rng);
    for (double& v : out.data) v = clamp01(v);
    return out;
}

Image augment_for_training(const Image& img, const std::vector<AugmentationGroup>& allowed_groups,
                           double extra_prob, const BasicAugConfig& cfg, RandomStream& rng) {
    if (extra_prob > 0.0) {
        if (allowed_groups.empty()) {
            throw std::invalid_argument("augment_for_training: extra requested with no groups");
        }
        if (rng.uniform() < extra_prob) {
            const AugmentationGroup g =
                allowed_groups[rng.uniform_int(static_cast<int>(allowed_groups.size()))];
            const auto tmpls = templates_for(g);
            const SpecTemplate* t = tmpls[rng.uniform_int(static_cast<int>(tmpls.size()))];
            const AugmentationSpec spec = sample_spec(*t, rng);
            const Image extra = apply_extra(img, spec, rng);
            return apply_basic(extra, cfg, rng);
        }
    }
    return apply_basic(img, cfg, rng);
}

}  // namespace shiftcraft
