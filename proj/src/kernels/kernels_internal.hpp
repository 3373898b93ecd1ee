#pragma once

#include "mrflearn/kernels.hpp"

namespace mrflearn::kernels::detail {

const KernelTable& scalar_impl();
#if defined(MRFLEARN_HAVE_AVX2)
const KernelTable& avx2_impl();
#endif

}  // namespace mrflearn::kernels::detail
