#include "bump_batch.hpp"

#include <cmath>

#if MEANFIELD_HAVE_LIBMVEC
#include <immintrin.h>

extern "C" __m256d _ZGVdN4v_exp(__m256d x);
#endif

namespace meanfield::detail {

#if MEANFIELD_HAVE_LIBMVEC

void bump_batch(const double* t2, double* w, std::size_t count) {
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d minus_one = _mm256_set1_pd(-1.0);
  std::size_t c = 0;
  for (; c + 4 <= count; c += 4) {
    const __m256d s = _mm256_sub_pd(one, _mm256_loadu_pd(t2 + c));
    _mm256_storeu_pd(w + c, _ZGVdN4v_exp(_mm256_div_pd(minus_one, s)));
  }
  if (c < count) {
    // Pad the tail so every value goes through the same vector routine.
    alignas(32) double in[4] = {0.0, 0.0, 0.0, 0.0};
    alignas(32) double out[4];
    for (std::size_t k = 0; c + k < count; ++k) in[k] = t2[c + k];
    const __m256d s = _mm256_sub_pd(one, _mm256_load_pd(in));
    _mm256_store_pd(out, _ZGVdN4v_exp(_mm256_div_pd(minus_one, s)));
    for (std::size_t k = 0; c + k < count; ++k) w[c + k] = out[k];
  }
}

#else

void bump_batch(const double* t2, double* w, std::size_t count) {
  for (std::size_t c = 0; c < count; ++c) w[c] = std::exp(-1.0 / (1.0 - t2[c]));
}

#endif

}  // namespace meanfield::detail
