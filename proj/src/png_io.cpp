#include "vplan/png_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <zlib.h>

namespace vplan {

namespace {

void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

std::uint32_t get_be32(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) << 24 | static_cast<std::uint32_t>(p[1]) << 16 |
           static_cast<std::uint32_t>(p[2]) << 8 | static_cast<std::uint32_t>(p[3]);
}

void append_chunk(std::vector<std::uint8_t>& out, const char type[4],
                  const std::vector<std::uint8_t>& payload) {
    put_be32(out, static_cast<std::uint32_t>(payload.size()));
    std::vector<std::uint8_t> body(type, type + 4);
    body.insert(body.end(), payload.begin(), payload.end());
    out.insert(out.end(), body.begin(), body.end());
    put_be32(out, static_cast<std::uint32_t>(crc32(0, body.data(), static_cast<uInt>(body.size()))));
}

int paeth(int a, int b, int c) {
    const int p = a + b - c;
    const int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
    if (pa <= pb && pa <= pc) return a;
    if (pb <= pc) return b;
    return c;
}

}  // namespace

void write_png(const std::string& path, const PngImage& image) {
    if (image.channels != 1 && image.channels != 3)
        throw std::invalid_argument("write_png: only greyscale or RGB supported");
    const std::size_t stride = static_cast<std::size_t>(image.width) * image.channels;
    if (image.pixels.size() != stride * image.height)
        throw std::invalid_argument("write_png: pixel buffer size mismatch");

    // Filter byte 0 per scanline.
    std::vector<std::uint8_t> raw;
    raw.reserve((stride + 1) * image.height);
    for (std::uint32_t y = 0; y < image.height; ++y) {
        raw.push_back(0);
        raw.insert(raw.end(), image.pixels.begin() + static_cast<std::ptrdiff_t>(y * stride),
                   image.pixels.begin() + static_cast<std::ptrdiff_t>((y + 1) * stride));
    }

    uLongf comp_len = compressBound(static_cast<uLong>(raw.size()));
    std::vector<std::uint8_t> compressed(comp_len);
    if (compress2(compressed.data(), &comp_len, raw.data(), static_cast<uLong>(raw.size()), 6) != Z_OK)
        throw std::runtime_error("write_png: deflate failed");
    compressed.resize(comp_len);

    std::vector<std::uint8_t> out = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    std::vector<std::uint8_t> ihdr;
    put_be32(ihdr, image.width);
    put_be32(ihdr, image.height);
    ihdr.push_back(8);  // bit depth
    ihdr.push_back(image.channels == 1 ? 0 : 2);  // colour type
    ihdr.push_back(0);
    ihdr.push_back(0);
    ihdr.push_back(0);
    append_chunk(out, "IHDR", ihdr);
    append_chunk(out, "IDAT", compressed);
    append_chunk(out, "IEND", {});

    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("write_png: cannot open " + path);
    f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
}

PngImage read_png(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("read_png: cannot open " + path);
    std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(f)),
                                   std::istreambuf_iterator<char>());
    static const std::uint8_t sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    if (data.size() < 8 || std::memcmp(data.data(), sig, 8) != 0)
        throw std::runtime_error("read_png: not a PNG file: " + path);

    PngImage img;
    std::vector<std::uint8_t> idat;
    std::size_t pos = 8;
    int bit_depth = 0, colour = -1;
    while (pos + 8 <= data.size()) {
        const std::uint32_t len = get_be32(&data[pos]);
        const std::string type(reinterpret_cast<const char*>(&data[pos + 4]), 4);
        if (pos + 12 + len > data.size()) throw std::runtime_error("read_png: truncated chunk");
        const std::uint8_t* payload = &data[pos + 8];
        if (type == "IHDR") {
            img.width = get_be32(payload);
            img.height = get_be32(payload + 4);
            bit_depth = payload[8];
            colour = payload[9];
            if (payload[12] != 0) throw std::runtime_error("read_png: interlaced PNG unsupported");
        } else if (type == "IDAT") {
            idat.insert(idat.end(), payload, payload + len);
        } else if (type == "IEND") {
            break;
        }
        pos += 12 + len;
    }
    if (bit_depth != 8 || (colour != 0 && colour != 2))
        throw std::runtime_error("read_png: only 8-bit greyscale/RGB supported");
    img.channels = colour == 0 ? 1 : 3;

    const std::size_t stride = static_cast<std::size_t>(img.width) * img.channels;
    std::vector<std::uint8_t> raw((stride + 1) * img.height);
    uLongf raw_len = static_cast<uLongf>(raw.size());
    if (uncompress(raw.data(), &raw_len, idat.data(), static_cast<uLong>(idat.size())) != Z_OK ||
        raw_len != raw.size())
        throw std::runtime_error("read_png: inflate failed for " + path);

    img.pixels.resize(stride * img.height);
    const int bpp = img.channels;
    for (std::uint32_t y = 0; y < img.height; ++y) {
        const std::uint8_t filter = raw[y * (stride + 1)];
        const std::uint8_t* src = &raw[y * (stride + 1) + 1];
        std::uint8_t* dst = &img.pixels[y * stride];
        const std::uint8_t* up = y > 0 ? &img.pixels[(y - 1) * stride] : nullptr;
        for (std::size_t x = 0; x < stride; ++x) {
            const int a = x >= static_cast<std::size_t>(bpp) ? dst[x - bpp] : 0;
            const int b = up ? up[x] : 0;
            const int c = (up && x >= static_cast<std::size_t>(bpp)) ? up[x - bpp] : 0;
            int v = src[x];
            switch (filter) {
                case 0: break;
                case 1: v += a; break;
                case 2: v += b; break;
                case 3: v += (a + b) / 2; break;
                case 4: v += paeth(a, b, c); break;
                default: throw std::runtime_error("read_png: unknown filter type");
            }
            dst[x] = static_cast<std::uint8_t>(v & 0xff);
        }
    }
    return img;
}

void save_png_frames(const std::string& directory, const PixelVideo& video) {
    if (video.channels != 1 && video.channels != 3)
        throw std::invalid_argument("save_png_frames: only 1- or 3-channel videos");
    std::filesystem::create_directories(directory);
    for (Eigen::Index t = 0; t < video.frames(); ++t) {
        PngImage img;
        img.width = static_cast<std::uint32_t>(video.width);
        img.height = static_cast<std::uint32_t>(video.height);
        img.channels = static_cast<int>(video.channels);
        img.pixels.resize(static_cast<std::size_t>(video.per_frame()));
        for (Eigen::Index y = 0; y < video.height; ++y)
            for (Eigen::Index x = 0; x < video.width; ++x)
                for (Eigen::Index c = 0; c < video.channels; ++c) {
                    const double v = std::clamp(video.at(t, c, y, x), -1.0, 1.0);
                    img.pixels[static_cast<std::size_t>((y * video.width + x) * video.channels + c)] =
                        static_cast<std::uint8_t>(std::lround((v + 1.0) * 127.5));
                }
        char name[32];
        std::snprintf(name, sizeof(name), "frame_%05d.png", static_cast<int>(t));
        write_png(directory + "/" + name, img);
    }
}

PixelVideo load_png_frames(const std::string& directory) {
    std::vector<std::string> files;
    for (const auto& entry : std::filesystem::directory_iterator(directory))
        if (entry.path().extension() == ".png") files.push_back(entry.path().string());
    if (files.empty()) throw std::runtime_error("load_png_frames: no PNG files in " + directory);
    std::sort(files.begin(), files.end());

    PixelVideo video;
    for (std::size_t t = 0; t < files.size(); ++t) {
        const PngImage img = read_png(files[t]);
        if (t == 0) {
            video.channels = img.channels;
            video.height = img.height;
            video.width = img.width;
            video.data.resize(static_cast<Eigen::Index>(files.size()), video.per_frame());
        } else if (img.channels != video.channels ||
                   static_cast<Eigen::Index>(img.height) != video.height ||
                   static_cast<Eigen::Index>(img.width) != video.width) {
            throw std::runtime_error("load_png_frames: inconsistent frame geometry");
        }
        for (Eigen::Index y = 0; y < video.height; ++y)
            for (Eigen::Index x = 0; x < video.width; ++x)
                for (Eigen::Index c = 0; c < video.channels; ++c)
                    video.at(static_cast<Eigen::Index>(t), c, y, x) =
                        img.pixels[static_cast<std::size_t>((y * video.width + x) * video.channels +
                                                            c)] /
                            127.5 -
                        1.0;
    }
    return video;
}

}  // namespace vplan
