#pragma once

#include <cstddef>

namespace meanfield::detail {

// w[c] = exp(-1/(1 - t2[c])) for c < count. Every t2[c] must lie in [0, 1).
// Uses the glibc vector exp when available; the result then differs from
// detail::bump by a few ulp but is the same for every call.
void bump_batch(const double* t2, double* w, std::size_t count);

}  // namespace meanfield::detail
