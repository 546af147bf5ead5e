#include <atomic>
#include <cstdlib>
#include <cstring>

#include "hdiff/kernels.hpp"

namespace hdiff::kernels {

namespace {

Isa initial_isa() {
    const Isa best = detected_isa();
    if (const char* env = std::getenv("HDIFF_KERNEL"); env && std::strcmp(env, "scalar") == 0)
        return Isa::Scalar;
    return best;
}

std::atomic<Isa>& selected() {
    static std::atomic<Isa> isa{initial_isa()};
    return isa;
}

}  // namespace

Isa detected_isa() {
#if defined(HDIFF_HAVE_AVX2)
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return Isa::Avx2;
#endif
    return Isa::Scalar;
}

Isa active_isa() { return selected().load(std::memory_order_relaxed); }

void select_isa(Isa isa) {
    if (isa == Isa::Avx2 && detected_isa() != Isa::Avx2) isa = Isa::Scalar;
    selected().store(isa, std::memory_order_relaxed);
}

std::string_view to_string(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

ContractFn contract() {
#if defined(HDIFF_HAVE_AVX2)
    if (active_isa() == Isa::Avx2) return contract_avx2;
#endif
    return contract_scalar;
}

WeightedDotFn weighted_dot() {
#if defined(HDIFF_HAVE_AVX2)
    if (active_isa() == Isa::Avx2) return weighted_dot_avx2;
#endif
    return weighted_dot_scalar;
}

}  // namespace hdiff::kernels
