#include "mrflearn/rng.hpp"

namespace mrflearn {

static_assert(derive_seed(1, {}) == mix64(1));
static_assert(derive_seed(7, {1}) != derive_seed(7, {2}));

}  // namespace mrflearn
