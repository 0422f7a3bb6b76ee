#include "dvc/baseline_cmds.hpp"

#include <cmath>
#include <cstdio>

namespace dvc {

namespace {
std::string fmt_fps(double fps) {
    if (fps == std::floor(fps)) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%d", static_cast<int>(fps));
        return buf;
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", fps);
    return buf;
}
}  // namespace

std::string h264_command(const BaselineSpec& s, int q) {
    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "ffmpeg -y -pix_fmt yuv420p -s %dx%d -r %s -i %s -vframes %d -c:v libx264 "
                  "-preset veryfast -tune zerolatency -crf %d -g %d -bf 2 -b_strategy 0 "
                  "-sc_threshold 0 -loglevel debug %s",
                  s.width, s.height, fmt_fps(s.fps).c_str(), s.input.c_str(), s.frames, q, s.gop,
                  s.output.c_str());
    return buf;
}

std::string h265_command(const BaselineSpec& s, int q) {
    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "ffmpeg -pix_fmt yuv420p -s %dx%d -r %s -i %s -vframes %d -c:v libx265 "
                  "-preset veryfast -tune zerolatency -x265-params \"crf=%d:keyint=%d:verbose=1\" "
                  "%s",
                  s.width, s.height, fmt_fps(s.fps).c_str(), s.input.c_str(), s.frames, q, s.gop,
                  s.output.c_str());
    return buf;
}

std::string emit_baseline_commands(const BaselineSpec& s, const std::vector<int>& qualities) {
    std::string out;
    for (int q : qualities) out += h264_command(s, q) + "\n";
    for (int q : qualities) out += h265_command(s, q) + "\n";
    return out;
}

}  // namespace dvc
