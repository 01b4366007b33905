#pragma once

// Binary PPM (P6, maxval 255) frame I/O.

#include <cctype>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "torchpilot/error.hpp"
#include "torchpilot/imgproc.hpp"

namespace torchpilot::ppm {

namespace detail {

inline void skip_space_and_comments(std::istream& in)
{
    for (;;) {
        const int c = in.peek();
        if (c == '#') {
            std::string ignored;
            std::getline(in, ignored);
        } else if (c != EOF && std::isspace(c)) {
            in.get();
        } else {
            return;
        }
    }
}

inline int read_header_int(std::istream& in, const char* what)
{
    skip_space_and_comments(in);
    int v = -1;
    if (!(in >> v)) throw InvalidInput(std::string("ppm: cannot read ") + what);
    return v;
}

} // namespace detail

inline void write(std::ostream& out, const imgproc::RgbImage& img)
{
    out << "P6\n" << img.width() << ' ' << img.height() << "\n255\n";
    for (const auto& p : img.pixels()) {
        const char px[3] = {static_cast<char>(p.r), static_cast<char>(p.g), static_cast<char>(p.b)};
        out.write(px, 3);
    }
    if (!out) throw IoError("ppm: write failed");
}

inline imgproc::RgbImage read(std::istream& in)
{
    char magic[2] = {};
    in.read(magic, 2);
    if (!in || magic[0] != 'P' || magic[1] != '6') throw InvalidInput("ppm: expected P6 magic");
    const int w = detail::read_header_int(in, "width");
    const int h = detail::read_header_int(in, "height");
    const int maxval = detail::read_header_int(in, "maxval");
    if (maxval != 255) throw InvalidInput("ppm: only maxval 255 is supported, got " + std::to_string(maxval));
    if (w <= 0 || h <= 0) throw InvalidInput("ppm: non-positive dimensions");
    if (!std::isspace(in.get())) throw InvalidInput("ppm: missing whitespace after header");

    imgproc::RgbImage img(w, h);
    for (auto& p : img.pixels()) {
        char px[3];
        if (!in.read(px, 3)) throw InvalidInput("ppm: truncated pixel data");
        p = {static_cast<std::uint8_t>(px[0]), static_cast<std::uint8_t>(px[1]), static_cast<std::uint8_t>(px[2])};
    }
    return img;
}

inline void write_file(const std::filesystem::path& path, const imgproc::RgbImage& img)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    write(out, img);
    out.flush();
    if (!out) throw IoError("write failed for " + path.string());
}

inline imgproc::RgbImage read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    try {
        return read(in);
    } catch (const InvalidInput& e) {
        throw InvalidInput(path.string() + ": " + e.what());
    }
}

/// Quantized frames are stored as P6 using the four primaries.
inline void write_quantized(std::ostream& out, const imgproc::QuantizedImage& q)
{
    write(out, imgproc::to_rgb(q));
}

/// Inverse of write_quantized; any non-primary pixel is rejected.
inline imgproc::QuantizedImage read_quantized(std::istream& in)
{
    const auto rgb = read(in);
    imgproc::QuantizedImage q(rgb.width(), rgb.height());
    auto src = rgb.pixels();
    auto dst = q.pixels();
    for (std::size_t i = 0; i < src.size(); ++i) {
        const auto& p = src[i];
        if (p == imgproc::Rgb{0, 0, 0}) dst[i] = imgproc::Color::Black;
        else if (p == imgproc::Rgb{255, 0, 0}) dst[i] = imgproc::Color::Red;
        else if (p == imgproc::Rgb{0, 255, 0}) dst[i] = imgproc::Color::Green;
        else if (p == imgproc::Rgb{0, 0, 255}) dst[i] = imgproc::Color::Blue;
        else throw InvalidInput("ppm: pixel " + std::to_string(i) + " is not a quantization primary");
    }
    return q;
}

} // namespace torchpilot::ppm
