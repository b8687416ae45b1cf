#include <atomic>
#include <cstdlib>
#include <cstring>

#include "peum/simd.hpp"

namespace peum::simd {

#ifdef PEUM_HAVE_AVX2
const Kernels* avx2_kernels_impl();
#endif

const char* isa_name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

const Kernels* avx2_kernels() {
#ifdef PEUM_HAVE_AVX2
    static const bool ok = __builtin_cpu_supports("avx2");
    return ok ? avx2_kernels_impl() : nullptr;
#else
    return nullptr;
#endif
}

namespace {

const Kernels* choose() {
    const char* env = std::getenv("PEUMLAB_SIMD");
    if (env && std::strcmp(env, "scalar") == 0) return &scalar_kernels();
    if (const Kernels* k = avx2_kernels()) return k;
    return &scalar_kernels();
}

std::atomic<const Kernels*>& slot() {
    static std::atomic<const Kernels*> s{choose()};
    return s;
}

}  // namespace

const Kernels& active() { return *slot().load(std::memory_order_acquire); }

void force(Isa isa) {
    const Kernels* k = isa == Isa::Avx2 ? avx2_kernels() : &scalar_kernels();
    slot().store(k ? k : &scalar_kernels(), std::memory_order_release);
}

}  // namespace peum::simd
