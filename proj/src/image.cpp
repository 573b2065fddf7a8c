#include "shiftcraft/image.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace shiftcraft {

Image to_image(const GrayImage& g, int channels) {
    if (channels != 1 && channels != 3) throw std::invalid_argument("to_image: channels must be 1 or 3");
    Image out(g.width, g.height, channels);
    for (std::size_t p = 0; p < g.data.size(); ++p) {
        for (int c = 0; c < channels; ++c) out.data[p * channels + c] = g.data[p];
    }
    return out;
}

Image resize_bilinear(const Image& img, int out_w, int out_h) {
    if (out_w <= 0 || out_h <= 0) throw std::invalid_argument("resize_bilinear: non-positive output size");
    if (img.empty()) throw std::invalid_argument("resize_bilinear: empty image");
    if (out_w == img.width && out_h == img.height) return img;

    Image out(out_w, out_h, img.channels);
    const double sx = static_cast<double>(img.width) / out_w;
    const double sy = static_cast<double>(img.height) / out_h;
    for (int y = 0; y < out_h; ++y) {
        double fy = (y + 0.5) * sy - 0.5;
        if (fy < 0.0) fy = 0.0;
        if (fy > img.height - 1) fy = img.height - 1;
        const int y0 = static_cast<int>(fy);
        const int y1 = std::min(y0 + 1, img.height - 1);
        const double wy = fy - y0;
        for (int x = 0; x < out_w; ++x) {
            double fx = (x + 0.5) * sx - 0.5;
            if (fx < 0.0) fx = 0.0;
            if (fx > img.width - 1) fx = img.width - 1;
            const int x0 = static_cast<int>(fx);
            const int x1 = std::min(x0 + 1, img.width - 1);
            const double wx = fx - x0;
            for (int c = 0; c < img.channels; ++c) {
                const double top = img.at(x0, y0, c) * (1.0 - wx) + img.at(x1, y0, c) * wx;
                const double bot = img.at(x0, y1, c) * (1.0 - wx) + img.at(x1, y1, c) * wx;
                out.at(x, y, c) = top * (1.0 - wy) + bot * wy;
            }
        }
    }
    return out;
}

}  // namespace shiftcraft
