#include "dvc/kernels.hpp"

#include <cstdlib>
#include <stdexcept>

namespace dvc::kern {
namespace {

const Ops* detect() {
#if defined(__x86_64__) || defined(_M_X64)
    if (cpu_has_avx2()) return &avx2_ops;
#endif
#if defined(__aarch64__)
    return &neon_ops;
#endif
    return &scalar_ops;
}

const Ops* resolve(const std::string& name) {
    if (name == "auto") return detect();
    if (name == "scalar") return &scalar_ops;
#if defined(__x86_64__) || defined(_M_X64)
    if (name == "avx2") {
        if (!cpu_has_avx2()) throw std::runtime_error("kernels: avx2 not supported on this CPU");
        return &avx2_ops;
    }
#endif
#if defined(__aarch64__)
    if (name == "neon") return &neon_ops;
#endif
    throw std::runtime_error("kernels: unknown backend '" + name + "'");
}

const Ops* initial() {
    if (const char* env = std::getenv("DVC_KERNELS")) return resolve(env);
    return detect();
}

const Ops*& active() {
    static const Ops* ptr = initial();
    return ptr;
}

}  // namespace

const Ops& ops() { return *active(); }

void set_backend(const std::string& name) { active() = resolve(name); }

std::vector<std::string> available_backends() {
    std::vector<std::string> v{"scalar"};
#if defined(__x86_64__) || defined(_M_X64)
    if (cpu_has_avx2()) v.push_back("avx2");
#endif
#if defined(__aarch64__)
    v.push_back("neon");
#endif
    return v;
}

}  // namespace dvc::kern
