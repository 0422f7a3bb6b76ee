#include "dvc/video_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <png.h>

#include "dvc/config.hpp"

namespace fs = std::filesystem;

namespace dvc {

void yuv_to_rgb(double y, double u, double v, float& r, float& g, float& b) {
    const double cb = u - 128.0, cr = v - 128.0;
    const double rr = y + 1.402 * cr;
    const double gg = y - 0.344136 * cb - 0.714136 * cr;
    const double bb = y + 1.772 * cb;
    auto norm = [](double x) {
        const double t = x / 255.0;
        return static_cast<float>(t < 0.0 ? 0.0 : (t > 1.0 ? 1.0 : t));
    };
    r = norm(rr);
    g = norm(gg);
    b = norm(bb);
}

void rgb_to_yuv(float r, float g, float b, double& y, double& u, double& v) {
    const double rr = 255.0 * r, gg = 255.0 * g, bb = 255.0 * b;
    y = 0.299 * rr + 0.587 * gg + 0.114 * bb;
    u = 128.0 - 0.168736 * rr - 0.331264 * gg + 0.5 * bb;
    v = 128.0 + 0.5 * rr - 0.418688 * gg - 0.081312 * bb;
}

Tensor load_png(const std::string& path) {
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.c_str()))
        throw std::runtime_error("png: cannot read " + path + ": " + image.message);
    image.format = PNG_FORMAT_RGB;
    std::vector<uint8_t> buf(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr)) {
        png_image_free(&image);
        throw std::runtime_error("png: decode failed for " + path + ": " + image.message);
    }
    const int W = static_cast<int>(image.width), H = static_cast<int>(image.height);
    Tensor t({3, H, W});
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x)
            for (int c = 0; c < 3; ++c)
                t(c, y, x) = static_cast<float>(buf[(static_cast<size_t>(y) * W + x) * 3 + c]) / 255.0f;
    return t;
}

void save_png(const std::string& path, const Tensor& frame) {
    const int H = frame.dim(1), W = frame.dim(2);
    std::vector<uint8_t> buf(static_cast<size_t>(H) * W * 3);
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x)
            for (int c = 0; c < 3; ++c) {
                float v = frame(c, y, x);
                v = v < 0.0f ? 0.0f : (v > 1.0f ? 1.0f : v);
                buf[(static_cast<size_t>(y) * W + x) * 3 + c] =
                    static_cast<uint8_t>(std::lround(v * 255.0f));
            }
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(W);
    image.height = static_cast<png_uint_32>(H);
    image.format = PNG_FORMAT_RGB;
    if (!png_image_write_to_file(&image, path.c_str(), 0, buf.data(), 0, nullptr))
        throw std::runtime_error("png: write failed for " + path + ": " + image.message);
}

void save_sequence_png(const std::string& dir, const std::vector<Tensor>& frames) {
    fs::create_directories(dir);
    char name[32];
    for (size_t i = 0; i < frames.size(); ++i) {
        std::snprintf(name, sizeof(name), "%06zu.png", i);
        save_png((fs::path(dir) / name).string(), frames[i]);
    }
}

SidecarConfig read_sidecar(const std::string& path) {
    const KvConfig kv = KvConfig::parse_file(path);
    SidecarConfig c;
    c.width = kv.get_int("width");
    c.height = kv.get_int("height");
    c.fps = kv.get_double("fps", 25.0);
    c.frame_count = kv.get_int("frame_count", 0);
    if (c.width <= 0 || c.height <= 0) throw std::runtime_error("sidecar: bad dimensions");
    return c;
}

namespace {

std::vector<Tensor> load_yuv420(const std::string& path) {
    const SidecarConfig cfg = read_sidecar(path + ".cfg");
    const int W = cfg.width, H = cfg.height;
    if (W % 2 || H % 2) throw std::runtime_error("yuv420: dims must be even");
    std::ifstream f(path, std::ios::binary | std::ios::ate);
    if (!f) throw std::runtime_error("yuv420: cannot open " + path);
    const uint64_t fsize = static_cast<uint64_t>(f.tellg());
    f.seekg(0);
    const uint64_t frame_bytes = static_cast<uint64_t>(W) * H * 3 / 2;
    if (fsize % frame_bytes)
        throw std::runtime_error("yuv420: file size is not a whole number of frames (frame " +
                                 std::to_string(fsize / frame_bytes) + " truncated)");
    uint64_t n = fsize / frame_bytes;
    if (cfg.frame_count > 0) {
        if (static_cast<uint64_t>(cfg.frame_count) > n)
            throw std::runtime_error("yuv420: sidecar frame_count exceeds file size");
        n = static_cast<uint64_t>(cfg.frame_count);
    }
    std::vector<uint8_t> buf(frame_bytes);
    std::vector<Tensor> frames;
    frames.reserve(n);
    const int cw = W / 2;
    for (uint64_t k = 0; k < n; ++k) {
        f.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(frame_bytes));
        if (!f)
            throw std::runtime_error("yuv420: failed reading frame " + std::to_string(k));
        const uint8_t* yp = buf.data();
        const uint8_t* up = yp + static_cast<size_t>(W) * H;
        const uint8_t* vp = up + static_cast<size_t>(cw) * (H / 2);
        Tensor t({3, H, W});
        for (int y = 0; y < H; ++y)
            for (int x = 0; x < W; ++x) {
                const double Y = yp[static_cast<size_t>(y) * W + x];
                const double U = up[static_cast<size_t>(y / 2) * cw + x / 2];
                const double V = vp[static_cast<size_t>(y / 2) * cw + x / 2];
                float r, g, b;
                yuv_to_rgb(Y, U, V, r, g, b);
                t(0, y, x) = r;
                t(1, y, x) = g;
                t(2, y, x) = b;
            }
        frames.push_back(std::move(t));
    }
    return frames;
}

std::vector<Tensor> load_png_dir(const std::string& path) {
    std::vector<std::string> names;
    for (const auto& e : fs::directory_iterator(path)) {
        if (e.is_regular_file() && e.path().extension() == ".png")
            names.push_back(e.path().string());
    }
    if (names.empty()) throw std::runtime_error("png dir: no .png files in " + path);
    std::sort(names.begin(), names.end());
    std::vector<Tensor> frames;
    frames.reserve(names.size());
    for (size_t i = 0; i < names.size(); ++i) {
        try {
            frames.push_back(load_png(names[i]));
        } catch (const std::exception& e) {
            throw std::runtime_error("png dir: frame " + std::to_string(i) + ": " + e.what());
        }
        if (!frames.back().same_shape(frames.front()))
            throw std::runtime_error("png dir: frame " + std::to_string(i) + " has mismatched dims");
    }
    return frames;
}

}  // namespace

std::vector<Tensor> load_sequence(const std::string& path, SequenceFormat format) {
    if (format == SequenceFormat::Auto)
        format = fs::is_directory(path) ? SequenceFormat::PngDirectory : SequenceFormat::RawYuv420;
    if (format == SequenceFormat::PngDirectory) return load_png_dir(path);
    return load_yuv420(path);
}

void save_yuv420(const std::string& path, const std::vector<Tensor>& frames, double fps) {
    if (frames.empty()) throw std::invalid_argument("save_yuv420: no frames");
    const int H = frames[0].dim(1), W = frames[0].dim(2);
    if (W % 2 || H % 2) throw std::runtime_error("save_yuv420: dims must be even");
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("save_yuv420: cannot open " + path);
    const int cw = W / 2, ch = H / 2;
    std::vector<uint8_t> yplane(static_cast<size_t>(W) * H);
    std::vector<uint8_t> uplane(static_cast<size_t>(cw) * ch), vplane(static_cast<size_t>(cw) * ch);
    auto to_u8 = [](double v) {
        const long r = std::lround(v);
        return static_cast<uint8_t>(r < 0 ? 0 : (r > 255 ? 255 : r));
    };
    for (const auto& t : frames) {
        std::vector<double> usum(uplane.size(), 0.0), vsum(vplane.size(), 0.0);
        for (int y = 0; y < H; ++y)
            for (int x = 0; x < W; ++x) {
                double Y, U, V;
                rgb_to_yuv(t(0, y, x), t(1, y, x), t(2, y, x), Y, U, V);
                yplane[static_cast<size_t>(y) * W + x] = to_u8(Y);
                const size_t ci = static_cast<size_t>(y / 2) * cw + x / 2;
                usum[ci] += U;
                vsum[ci] += V;
            }
        for (size_t i = 0; i < uplane.size(); ++i) {
            uplane[i] = to_u8(usum[i] / 4.0);
            vplane[i] = to_u8(vsum[i] / 4.0);
        }
        f.write(reinterpret_cast<const char*>(yplane.data()), static_cast<std::streamsize>(yplane.size()));
        f.write(reinterpret_cast<const char*>(uplane.data()), static_cast<std::streamsize>(uplane.size()));
        f.write(reinterpret_cast<const char*>(vplane.data()), static_cast<std::streamsize>(vplane.size()));
    }
    if (!f) throw std::runtime_error("save_yuv420: write failed");
    std::ofstream sc(path + ".cfg");
    sc << "width = " << W << "\nheight = " << H << "\nfps = " << fps
       << "\nframe_count = " << frames.size() << "\n";
}

void save_raw_tensor(const std::string& path, const Tensor& t) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for write: " + path);
    const uint32_t nd = static_cast<uint32_t>(t.ndim());
    f.write(reinterpret_cast<const char*>(&nd), 4);
    for (int i = 0; i < t.ndim(); ++i) {
        const int32_t d = t.dim(i);
        f.write(reinterpret_cast<const char*>(&d), 4);
    }
    f.write(reinterpret_cast<const char*>(t.data()),
            static_cast<std::streamsize>(sizeof(float) * t.numel()));
}

Tensor load_raw_tensor(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open: " + path);
    uint32_t nd = 0;
    f.read(reinterpret_cast<char*>(&nd), 4);
    std::vector<int> shape(nd);
    for (uint32_t i = 0; i < nd; ++i) f.read(reinterpret_cast<char*>(&shape[i]), 4);
    Tensor t(shape);
    f.read(reinterpret_cast<char*>(t.data()), static_cast<std::streamsize>(sizeof(float) * t.numel()));
    if (!f) throw std::runtime_error("raw tensor: truncated " + path);
    return t;
}

}  // namespace dvc
