#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "dvc/video_io.hpp"

using namespace dvc;
namespace fs = std::filesystem;

namespace {
fs::path scratch_dir(const char* name) {
    const fs::path p = fs::temp_directory_path() / "dvc_tests" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}
}  // namespace

TEST_CASE("png: save/load roundtrip is exact on 8-bit grids") {
    const auto dir = scratch_dir("png_rt");
    Tensor f({3, 20, 30});
    Rng rng(81);
    for (int64_t i = 0; i < f.numel(); ++i)
        f.at(i) = static_cast<float>(rng.uniform_int(0, 255)) / 255.0f;
    const std::string path = (dir / "x.png").string();
    save_png(path, f);
    const Tensor g = load_png(path);
    REQUIRE(g.same_shape(f));
    for (int64_t i = 0; i < f.numel(); ++i) CHECK(g.at(i) == doctest::Approx(f.at(i)).epsilon(1e-6));
}

TEST_CASE("png directory: zero-padded names define the order") {
    const auto dir = scratch_dir("png_dir");
    std::vector<Tensor> frames;
    for (int i = 0; i < 3; ++i) {
        Tensor f = Tensor::full({3, 64, 64}, 0.0f);
        f(0, 0, 0) = static_cast<float>(i * 100) / 255.0f;  // order marker
        frames.push_back(f);
    }
    save_sequence_png(dir.string(), frames);
    const auto loaded = load_sequence(dir.string());
    REQUIRE(loaded.size() == 3);
    for (size_t i = 0; i < 3; ++i) {
        CHECK(loaded[i].shape() == std::vector<int>{3, 64, 64});
        CHECK(loaded[i](0, 0, 0) == doctest::Approx(frames[i](0, 0, 0)).epsilon(1e-6));
    }
}

TEST_CASE("yuv420: full-range black maps to exactly zero rgb") {
    const auto dir = scratch_dir("yuv_black");
    const std::string path = (dir / "black.yuv").string();
    const int W = 16, H = 16;
    {
        std::ofstream f(path, std::ios::binary);
        std::vector<uint8_t> y(static_cast<size_t>(W) * H, 0);          // Y = 0 (full range)
        std::vector<uint8_t> c(static_cast<size_t>(W / 2) * (H / 2), 128);  // U = V = 128
        f.write(reinterpret_cast<char*>(y.data()), static_cast<std::streamsize>(y.size()));
        f.write(reinterpret_cast<char*>(c.data()), static_cast<std::streamsize>(c.size()));
        f.write(reinterpret_cast<char*>(c.data()), static_cast<std::streamsize>(c.size()));
    }
    {
        std::ofstream f(path + ".cfg");
        f << "width = 16\nheight = 16\nfps = 25\nframe_count = 1\n";
    }
    const auto frames = load_sequence(path);
    REQUIRE(frames.size() == 1);
    for (int64_t i = 0; i < frames[0].numel(); ++i) CHECK(frames[0].at(i) == 0.0f);
}

TEST_CASE("yuv420: frame count arithmetic and truncation errors") {
    const auto dir = scratch_dir("yuv_count");
    const std::string path = (dir / "v.yuv").string();
    const int W = 8, H = 8;
    const size_t frame_bytes = static_cast<size_t>(W) * H * 3 / 2;
    {
        std::ofstream f(path, std::ios::binary);
        std::vector<uint8_t> buf(frame_bytes * 4, 77);
        f.write(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    }
    {
        std::ofstream f(path + ".cfg");
        f << "width = 8\nheight = 8\n";
    }
    CHECK(load_sequence(path).size() == 4);

    // truncate mid-frame: loader must name the bad frame
    fs::resize_file(path, frame_bytes * 2 + 10);
    try {
        static_cast<void>(load_sequence(path));
        FAIL("expected a decode error");
    } catch (const std::exception& e) {
        CHECK(std::string(e.what()).find("frame 2") != std::string::npos);
    }
}

TEST_CASE("yuv420: rgb -> yuv -> rgb roundtrip is close for flat blocks") {
    const auto dir = scratch_dir("yuv_rt");
    const std::string path = (dir / "v.yuv").string();
    Tensor f({3, 16, 16});
    // flat 2x2 blocks so chroma subsampling is lossless up to rounding
    Rng rng(82);
    for (int by = 0; by < 8; ++by)
        for (int bx = 0; bx < 8; ++bx) {
            const float r = static_cast<float>(rng.uniform(0.1, 0.9));
            const float g = static_cast<float>(rng.uniform(0.1, 0.9));
            const float b = static_cast<float>(rng.uniform(0.1, 0.9));
            for (int dy = 0; dy < 2; ++dy)
                for (int dx = 0; dx < 2; ++dx) {
                    f(0, 2 * by + dy, 2 * bx + dx) = r;
                    f(1, 2 * by + dy, 2 * bx + dx) = g;
                    f(2, 2 * by + dy, 2 * bx + dx) = b;
                }
        }
    save_yuv420(path, {f});
    const auto back = load_sequence(path);
    REQUIRE(back.size() == 1);
    for (int64_t i = 0; i < f.numel(); ++i)
        CHECK(std::abs(back[0].at(i) - f.at(i)) < 2.0f / 255.0f + 1e-4f);
}

TEST_CASE("raw tensor dumps roundtrip bit-exactly") {
    const auto dir = scratch_dir("raw");
    Tensor t({2, 3, 5});
    Rng rng(83);
    rng.fill_normal(t, 0.0f, 10.0f);
    const std::string path = (dir / "t.f32").string();
    save_raw_tensor(path, t);
    const Tensor u = load_raw_tensor(path);
    REQUIRE(u.same_shape(t));
    for (int64_t i = 0; i < t.numel(); ++i) CHECK(u.at(i) == t.at(i));
}

TEST_CASE("sidecar config parsing") {
    const auto dir = scratch_dir("sidecar");
    const std::string path = (dir / "v.yuv.cfg").string();
    {
        std::ofstream f(path);
        f << "# comment\nwidth = 352\nheight=288\nfps = 29.97\nframe_count = 100\n";
    }
    const auto sc = read_sidecar(path);
    CHECK(sc.width == 352);
    CHECK(sc.height == 288);
    CHECK(sc.fps == doctest::Approx(29.97));
    CHECK(sc.frame_count == 100);
}
