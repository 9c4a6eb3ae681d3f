#pragma once

#include "dhs/kernels.hpp"

namespace dhs::kernels {

namespace scalar {
const Table& table();
}

#if defined(DHS_HAVE_AVX2)
namespace avx2 {
const Table& table();
}
#endif

}  // namespace dhs::kernels
