#include "shiftcraft/imageio.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace shiftcraft {

namespace {

std::string lower_ext(const std::string& path) {
    const std::size_t dot = path.find_last_of('.');
    if (dot == std::string::npos) return "";
    std::string ext = path.substr(dot + 1);
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return ext;
}

Image read_png_file(const std::string& path) {
    png_image pimg;
    std::memset(&pimg, 0, sizeof(pimg));
    pimg.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&pimg, path.c_str())) {
        throw std::runtime_error("read_image: cannot read PNG " + path + ": " + pimg.message);
    }
    const bool color = (pimg.format & PNG_FORMAT_FLAG_COLOR) != 0;
    pimg.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    const int channels = color ? 3 : 1;
    std::vector<png_byte> buf(PNG_IMAGE_SIZE(pimg));
    png_color background{255, 255, 255};
    if (!png_image_finish_read(&pimg, &background, buf.data(), 0, nullptr)) {
        png_image_free(&pimg);
        throw std::runtime_error("read_image: failed decoding PNG " + path + ": " +
                                 pimg.message);
    }
    Image out(static_cast<int>(pimg.width), static_cast<int>(pimg.height), channels);
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] = buf[i] / 255.0;
    return out;
}

void write_png_file(const Image& img, const std::string& path) {
    png_image pimg;
    std::memset(&pimg, 0, sizeof(pimg));
    pimg.version = PNG_IMAGE_VERSION;
    pimg.width = static_cast<png_uint_32>(img.width);
    pimg.height = static_cast<png_uint_32>(img.height);
    pimg.format = img.channels == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
    std::vector<png_byte> buf(img.data.size());
    for (std::size_t i = 0; i < img.data.size(); ++i) {
        buf[i] = static_cast<png_byte>(std::lround(clamp01(img.data[i]) * 255.0));
    }
    if (!png_image_write_to_file(&pimg, path.c_str(), 0, buf.data(), 0, nullptr)) {
        throw std::runtime_error("write_image: cannot write PNG " + path + ": " + pimg.message);
    }
}

// Skips PNM whitespace and '#' comments.
void skip_pnm_space(std::istream& in) {
    for (;;) {
        const int c = in.peek();
        if (c == '#') {
            std::string line;
            std::getline(in, line);
        } else if (c != EOF && std::isspace(static_cast<unsigned char>(c))) {
            in.get();
        } else {
            return;
        }
    }
}

int read_pnm_int(std::istream& in) {
    skip_pnm_space(in);
    int v = -1;
    in >> v;
    if (!in || v < 0) throw std::runtime_error("read_image: malformed PNM header");
    return v;
}

Image read_pnm_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_image: cannot open " + path);
    char p = 0, kind = 0;
    in.get(p).get(kind);
    if (p != 'P' || (kind != '2' && kind != '3' && kind != '5' && kind != '6')) {
        throw std::runtime_error("read_image: unsupported PNM type in " + path);
    }
    const bool color = kind == '3' || kind == '6';
    const bool binary = kind == '5' || kind == '6';
    const int w = read_pnm_int(in);
    const int h = read_pnm_int(in);
    const int maxval = read_pnm_int(in);
    if (w < 1 || h < 1) throw std::runtime_error("read_image: bad PNM size in " + path);
    if (maxval != 255) {
        throw std::runtime_error("read_image: only 8-bit PNM supported: " + path);
    }
    const int channels = color ? 3 : 1;
    Image out(w, h, channels);
    const std::size_t n = out.data.size();
    if (binary) {
        in.get();  // single whitespace after maxval
        std::vector<unsigned char> buf(n);
        in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n));
        if (!in) throw std::runtime_error("read_image: truncated PNM " + path);
        for (std::size_t i = 0; i < n; ++i) out.data[i] = buf[i] / 255.0;
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            const int v = read_pnm_int(in);
            if (v > 255) throw std::runtime_error("read_image: PNM sample out of range");
            out.data[i] = v / 255.0;
        }
    }
    return out;
}

void write_pnm_file(const Image& img, const std::string& path, bool color) {
    if (color && img.channels != 3) {
        throw std::runtime_error("write_image: PPM needs a 3-channel image: " + path);
    }
    if (!color && img.channels != 1) {
        throw std::runtime_error("write_image: PGM needs a 1-channel image: " + path);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_image: cannot open " + path);
    out << (color ? "P6" : "P5") << '\n' << img.width << ' ' << img.height << "\n255\n";
    std::vector<unsigned char> buf(img.data.size());
    for (std::size_t i = 0; i < img.data.size(); ++i) {
        buf[i] = static_cast<unsigned char>(std::lround(clamp01(img.data[i]) * 255.0));
    }
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size()));
    if (!out) throw std::runtime_error("write_image: write failed for " + path);
}

}  // namespace

Image read_image(const std::string& path) {
    const std::string ext = lower_ext(path);
    if (ext == "png") return read_png_file(path);
    if (ext == "pgm" || ext == "ppm" || ext == "pnm") return read_pnm_file(path);
    throw std::runtime_error("read_image: unsupported extension ." + ext + " for " + path);
}

void write_image(const Image& img, const std::string& path) {
    if (img.empty()) throw std::runtime_error("write_image: empty image for " + path);
    const std::string ext = lower_ext(path);
    if (ext == "png") {
        write_png_file(img, path);
    } else if (ext == "pgm") {
        write_pnm_file(img, path, false);
    } else if (ext == "ppm") {
        write_pnm_file(img, path, true);
    } else {
        throw std::runtime_error("write_image: unsupported extension ." + ext + " for " + path);
    }
}

void write_image(const BinaryMap& map, const std::string& path) {
    Image img(map.width, map.height, 1);
    for (std::size_t i = 0; i < map.bits.size(); ++i) img.data[i] = map.bits[i] ? 1.0 : 0.0;
    write_image(img, path);
}

}  // namespace shiftcraft
