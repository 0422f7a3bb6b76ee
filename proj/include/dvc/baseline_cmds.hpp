#pragma once

#include <string>
#include <vector>

namespace dvc {

struct BaselineSpec {
    int width = 0;
    int height = 0;
    double fps = 25.0;
    int frames = 100;
    int gop = 10;
    std::string input = "Video.yuv";
    std::string output = "output.mkv";
};

// ffmpeg command lines for the x264/x265 reference runs (one per quality).
std::string h264_command(const BaselineSpec& s, int q);
std::string h265_command(const BaselineSpec& s, int q);

// All H.264 lines then all H.265 lines, one command per line.
std::string emit_baseline_commands(const BaselineSpec& s, const std::vector<int>& qualities);

}  // namespace dvc
