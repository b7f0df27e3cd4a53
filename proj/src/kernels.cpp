#include "autoinv/kernels.hpp"

#include <cstdlib>
#include <stdexcept>
#include <string>

namespace autoinv::kernels {
namespace {

const Ops& select_ops() {
    if (const char* env = std::getenv("AUTOINV_KERNELS")) {
        const std::string want(env);
        if (want == "scalar") return scalar_ops();
        if (want == "avx2") {
            const Ops* v = avx2_ops();
            if (!v) throw std::runtime_error("AUTOINV_KERNELS=avx2 requested but AVX2+FMA is unavailable");
            return *v;
        }
        if (!want.empty()) {
            throw std::runtime_error("unknown AUTOINV_KERNELS backend '" + want + "' (use scalar or avx2)");
        }
    }
    if (const Ops* v = avx2_ops()) return *v;
    return scalar_ops();
}

}  // namespace

const Ops& ops() {
    static const Ops& selected = select_ops();
    return selected;
}

std::string active_backend_name() { return ops().name; }

}  // namespace autoinv::kernels
