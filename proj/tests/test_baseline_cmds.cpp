#include <doctest.h>

#include <fstream>
#include <sstream>

#include "dvc/baseline_cmds.hpp"

using namespace dvc;

#ifndef DVC_TEST_DATA_DIR
#define DVC_TEST_DATA_DIR "."
#endif

namespace {
std::string read_text(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    REQUIRE(f);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}
}  // namespace

TEST_CASE("baseline commands byte-match the golden templates") {
    const std::vector<int> qs = {15, 19, 23, 27};

    BaselineSpec hevc;  // HEVC-style run: gop 10
    hevc.width = 352;
    hevc.height = 288;
    hevc.fps = 25;
    hevc.frames = 100;
    hevc.gop = 10;
    CHECK(emit_baseline_commands(hevc, qs) ==
          read_text(std::string(DVC_TEST_DATA_DIR) + "/golden/baseline_gop10.txt"));

    BaselineSpec uvg;  // UVG-style run: gop 12
    uvg.width = 1920;
    uvg.height = 1080;
    uvg.fps = 120;
    uvg.frames = 600;
    uvg.gop = 12;
    CHECK(emit_baseline_commands(uvg, qs) ==
          read_text(std::string(DVC_TEST_DATA_DIR) + "/golden/baseline_gop12.txt"));
}

TEST_CASE("baseline commands: four per codec, parameters substituted") {
    BaselineSpec s;
    s.width = 640;
    s.height = 480;
    s.fps = 29.97;
    s.frames = 60;
    s.gop = 10;
    s.input = "seq.yuv";
    const std::string text = emit_baseline_commands(s, {15, 19, 23, 27});
    int lines = 0;
    for (char ch : text)
        if (ch == '\n') ++lines;
    CHECK(lines == 8);
    CHECK(text.find("-s 640x480") != std::string::npos);
    CHECK(text.find("-r 29.97") != std::string::npos);
    CHECK(text.find("-i seq.yuv") != std::string::npos);
    CHECK(text.find("-crf 27") != std::string::npos);
    CHECK(text.find("crf=23:keyint=10") != std::string::npos);
}
