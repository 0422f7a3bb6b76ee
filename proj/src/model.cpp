#include "dvc/model.hpp"

#include <cstring>
#include <fstream>
#include <map>
#include <stdexcept>

namespace dvc {

uint8_t lambda_id_for(float lambda) {
    for (size_t i = 0; i < kLambdaPresets.size(); ++i)
        if (kLambdaPresets[i] == lambda) return static_cast<uint8_t>(i);
    return 255;
}

uint8_t AblationConfig::to_bits() const {
    uint8_t b = 0;
    if (use_mc_net) b |= 1;
    if (use_mv_codec) b |= 2;
    if (joint_flow_training) b |= 4;
    if (use_buffer) b |= 8;
    if (use_motion) b |= 16;
    return b;
}

AblationConfig AblationConfig::from_bits(uint8_t bits) {
    AblationConfig a;
    a.use_mc_net = bits & 1;
    a.use_mv_codec = bits & 2;
    a.joint_flow_training = bits & 4;
    a.use_buffer = bits & 8;
    a.use_motion = bits & 16;
    return a;
}

CodecModel::CodecModel(const ModelConfig& cfg_)
    : cfg(cfg_),
      init_rng_(cfg_.init_seed),
      flow(cfg_.flow, init_rng_),
      mv(init_rng_),
      mc(cfg_.mc, init_rng_),
      residual(cfg_.residual, init_rng_),
      intra(cfg_.residual, init_rng_),
      mv_density(MvCodec::kLatentChannels, cfg_.density, init_rng_),
      res_density(cfg_.residual.latent_channels, cfg_.density, init_rng_),
      intra_density(cfg_.residual.latent_channels, cfg_.density, init_rng_) {}

nn::NamedParams CodecModel::params() {
    nn::NamedParams p;
    flow.collect(p, "flow");
    mv.collect(p, "mv");
    mc.collect(p, "mc");
    residual.collect(p, "residual");
    intra.collect(p, "intra");
    mv_density.collect(p, "mv_density");
    res_density.collect(p, "res_density");
    intra_density.collect(p, "intra_density");
    return p;
}

void CodecModel::project() {
    mv.project();
    residual.project();
    intra.project();
}

void CodecModel::zero_grads() {
    for (auto& [name, p] : params()) p->zero_grad();
}

namespace {

constexpr char kMagic[4] = {'D', 'V', 'C', 'K'};
constexpr uint8_t kVersion = 1;

template <typename T>
void put(std::ofstream& f, T v) {
    f.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <typename T>
T get(std::ifstream& f) {
    T v{};
    f.read(reinterpret_cast<char*>(&v), sizeof(T));
    return v;
}

}  // namespace

void CodecModel::save(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("checkpoint: cannot open for write: " + path);
    f.write(kMagic, 4);
    put<uint8_t>(f, kVersion);
    put<float>(f, cfg.lambda);
    put<uint8_t>(f, lambda_id_for(cfg.lambda));
    put<uint8_t>(f, cfg.ablation.to_bits());
    put<int32_t>(f, cfg.flow.levels);
    put<int32_t>(f, cfg.flow.min_coarse_dim);
    put<int32_t>(f, cfg.mc.channels);
    put<int32_t>(f, cfg.mc.num_residual_blocks);
    put<int32_t>(f, cfg.residual.filters);
    put<int32_t>(f, cfg.residual.latent_channels);
    put<int32_t>(f, cfg.density.stages);
    put<int32_t>(f, cfg.density.width);
    put<uint64_t>(f, cfg.init_seed);

    auto& self = const_cast<CodecModel&>(*this);
    const nn::NamedParams ps = self.params();
    put<uint32_t>(f, static_cast<uint32_t>(ps.size()));
    for (const auto& [name, p] : ps) {
        put<uint16_t>(f, static_cast<uint16_t>(name.size()));
        f.write(name.data(), static_cast<std::streamsize>(name.size()));
        put<uint8_t>(f, static_cast<uint8_t>(p->value.ndim()));
        for (int i = 0; i < p->value.ndim(); ++i) put<int32_t>(f, p->value.dim(i));
        f.write(reinterpret_cast<const char*>(p->value.data()),
                static_cast<std::streamsize>(sizeof(float) * p->value.numel()));
    }
    if (!f) throw std::runtime_error("checkpoint: write failed: " + path);
}

std::unique_ptr<CodecModel> CodecModel::load(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("checkpoint: cannot open: " + path);
    char magic[4];
    f.read(magic, 4);
    if (!f || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("checkpoint: bad magic: " + path);
    if (get<uint8_t>(f) != kVersion) throw std::runtime_error("checkpoint: unsupported version");

    ModelConfig cfg;
    cfg.lambda = get<float>(f);
    get<uint8_t>(f);  // lambda_id, derived
    cfg.ablation = AblationConfig::from_bits(get<uint8_t>(f));
    cfg.flow.levels = get<int32_t>(f);
    cfg.flow.min_coarse_dim = get<int32_t>(f);
    cfg.mc.channels = get<int32_t>(f);
    cfg.mc.num_residual_blocks = get<int32_t>(f);
    cfg.residual.filters = get<int32_t>(f);
    cfg.residual.latent_channels = get<int32_t>(f);
    cfg.density.stages = get<int32_t>(f);
    cfg.density.width = get<int32_t>(f);
    cfg.init_seed = get<uint64_t>(f);

    auto model = std::make_unique<CodecModel>(cfg);
    std::map<std::string, nn::Parameter*> by_name;
    for (auto& [name, p] : model->params()) by_name[name] = p;

    const uint32_t count = get<uint32_t>(f);
    if (count != by_name.size())
        throw std::runtime_error("checkpoint: parameter count mismatch");
    for (uint32_t i = 0; i < count; ++i) {
        const uint16_t len = get<uint16_t>(f);
        std::string name(len, '\0');
        f.read(name.data(), len);
        auto it = by_name.find(name);
        if (it == by_name.end()) throw std::runtime_error("checkpoint: unknown tensor " + name);
        const uint8_t nd = get<uint8_t>(f);
        std::vector<int> shape(nd);
        for (int d = 0; d < nd; ++d) shape[static_cast<size_t>(d)] = get<int32_t>(f);
        if (shape != it->second->value.shape())
            throw std::runtime_error("checkpoint: shape mismatch for " + name);
        f.read(reinterpret_cast<char*>(it->second->value.data()),
               static_cast<std::streamsize>(sizeof(float) * it->second->value.numel()));
    }
    if (!f) throw std::runtime_error("checkpoint: truncated: " + path);
    return model;
}

void CodecModel::copy_params_from(CodecModel& other, const std::string& prefix) {
    std::map<std::string, nn::Parameter*> src;
    for (auto& [name, p] : other.params()) src[name] = p;
    for (auto& [name, p] : params()) {
        if (name.rfind(prefix, 0) != 0) continue;
        auto it = src.find(name);
        if (it == src.end() || it->second->value.shape() != p->value.shape())
            throw std::runtime_error("copy_params_from: incompatible parameter " + name);
        std::memcpy(p->value.data(), it->second->value.data(),
                    sizeof(float) * static_cast<size_t>(p->value.numel()));
    }
}

}  // namespace dvc
