#include "bregproj/kernels.hpp"

#include <cstdlib>
#include <string_view>

namespace bregproj::kernels {

#ifndef BREGPROJ_HAVE_AVX2
const KernelTable* avx2_table() { return nullptr; }
#endif

bool cpu_has_avx2() {
#if defined(BREGPROJ_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

namespace {

const KernelTable& select() {
    const char* env = std::getenv("BREGPROJ_SIMD");
    if (env != nullptr && std::string_view(env) == "scalar") return scalar_table();
    if (const KernelTable* t = avx2_table(); t != nullptr && cpu_has_avx2()) return *t;
    return scalar_table();
}

} // namespace

const KernelTable& active() {
    static const KernelTable& table = select();
    return table;
}

} // namespace bregproj::kernels
