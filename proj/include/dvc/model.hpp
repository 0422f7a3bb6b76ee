#pragma once

#include <array>
#include <memory>
#include <string>

#include "dvc/entropy.hpp"
#include "dvc/flow_net.hpp"
#include "dvc/motion_comp.hpp"
#include "dvc/mv_codec.hpp"
#include "dvc/residual_codec.hpp"

namespace dvc {

inline constexpr std::array<float, 4> kLambdaPresets{256.0f, 512.0f, 1024.0f, 2048.0f};
uint8_t lambda_id_for(float lambda);  // preset index, or 255 for custom values

struct AblationConfig {
    bool use_mc_net = true;
    bool use_mv_codec = true;
    bool joint_flow_training = true;
    bool use_buffer = true;
    bool use_motion = true;

    uint8_t to_bits() const;
    static AblationConfig from_bits(uint8_t bits);
    bool operator==(const AblationConfig&) const = default;
};

struct ModelConfig {
    FlowNetConfig flow{};
    McNetConfig mc{};
    ResidualCodecConfig residual{};
    DensityConfig density{};
    AblationConfig ablation{};
    float lambda = 1024.0f;
    uint64_t init_seed = 42;
};

// Everything trainable under one roof: flow estimator, motion and residual
// transforms, the motion-compensation net, an independent intra-frame codec
// reusing the residual architecture, and one factorized entropy model per
// latent kind.
class CodecModel {
public:
    explicit CodecModel(const ModelConfig& cfg);

    nn::NamedParams params();
    void project();  // re-apply GDN constraints after an optimizer step
    void zero_grads();

    void save(const std::string& path) const;
    static std::unique_ptr<CodecModel> load(const std::string& path);

    // copy parameter values by name from another model (e.g. pretrained flow)
    void copy_params_from(CodecModel& other, const std::string& prefix);

    ModelConfig cfg;

private:
    Rng init_rng_;  // declared before the modules: drives their initialization

public:
    FlowNet flow;
    MvCodec mv;
    McNet mc;
    ResidualCodec residual;
    ResidualCodec intra;
    FactorizedDensity mv_density;
    FactorizedDensity res_density;
    FactorizedDensity intra_density;
};

}  // namespace dvc
