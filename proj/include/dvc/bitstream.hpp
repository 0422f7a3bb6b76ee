#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dvc {

enum class FrameType : uint8_t { Intra = 0, Predicted = 1 };

// Channel groups with their own V_max entry in the stream header.
enum class LatentGroup : uint8_t { IntraResidual = 0, Motion = 1, Residual = 2 };

struct StreamHeader {
    uint8_t version = 1;
    uint16_t width = 0;   // original (pre-padding) dims
    uint16_t height = 0;
    uint8_t gop_size = 0;
    uint16_t num_frames = 0;
    uint8_t lambda_id = 0;
    std::vector<std::pair<uint8_t, uint16_t>> vmax;  // (group id, V_max)

    int vmax_for(LatentGroup g) const;
};

struct EncodedFrame {
    FrameType type = FrameType::Intra;
    std::vector<uint8_t> motion_payload;    // empty for intra frames
    std::vector<uint8_t> residual_payload;
};

std::vector<uint8_t> write_bitstream(const StreamHeader& header,
                                     const std::vector<EncodedFrame>& frames);
std::pair<StreamHeader, std::vector<EncodedFrame>> read_bitstream(const std::vector<uint8_t>& bytes);

uint32_t crc32(const uint8_t* data, size_t n, uint32_t seed = 0);

void write_file(const std::string& path, const std::vector<uint8_t>& bytes);
std::vector<uint8_t> read_file(const std::string& path);

}  // namespace dvc
