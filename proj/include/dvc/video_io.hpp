#pragma once

#include <string>
#include <vector>

#include "dvc/tensor.hpp"

namespace dvc {

enum class SequenceFormat { Auto, RawYuv420, PngDirectory };

struct SidecarConfig {
    int width = 0;
    int height = 0;
    double fps = 25.0;
    int frame_count = 0;  // 0: derive from file size
};

// Raw planar 4:2:0 sequences carry a "<path>.cfg" sidecar (width/height/
// fps/frame_count keys); PNG directories are ordered by their zero-padded
// numeric filenames.
std::vector<Tensor> load_sequence(const std::string& path,
                                  SequenceFormat format = SequenceFormat::Auto);

Tensor load_png(const std::string& path);
void save_png(const std::string& path, const Tensor& frame);
void save_sequence_png(const std::string& dir, const std::vector<Tensor>& frames);

SidecarConfig read_sidecar(const std::string& path);
void save_yuv420(const std::string& path, const std::vector<Tensor>& frames, double fps = 25.0);

// BT.601 full-range conversions; y/u/v in 0..255, rgb in [0,1].
void yuv_to_rgb(double y, double u, double v, float& r, float& g, float& b);
void rgb_to_yuv(float r, float g, float b, double& y, double& u, double& v);

// Raw float32 dumps, used to compare reconstructions bit-exactly.
void save_raw_tensor(const std::string& path, const Tensor& t);
Tensor load_raw_tensor(const std::string& path);

}  // namespace dvc
