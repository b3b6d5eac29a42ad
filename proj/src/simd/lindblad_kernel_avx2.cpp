// Compiled with -mavx2. Only reached after a runtime CPU check.

#include <immintrin.h>

#include "lindblad_kernel_impl.hpp"

namespace qdsim::simd {
namespace {

struct Vec4 {
  __m256d v;
  Vec4() = default;
  explicit Vec4(double x) : v(_mm256_set1_pd(x)) {}
  explicit Vec4(__m256d x) : v(x) {}
};

inline Vec4 operator+(Vec4 a, Vec4 b) { return Vec4(_mm256_add_pd(a.v, b.v)); }
inline Vec4 operator-(Vec4 a, Vec4 b) { return Vec4(_mm256_sub_pd(a.v, b.v)); }
inline Vec4 operator*(Vec4 a, Vec4 b) { return Vec4(_mm256_mul_pd(a.v, b.v)); }

}  // namespace

void integrate_window_avx2(std::array<LaneState, kBatch>& lanes, const DriveBlock& drive,
                           const LindbladRates& rates) {
  static_assert(kBatch == 4, "AVX2 kernel packs four double lanes");
  Rho<Vec4> rho;
  for (int n = 0; n < 16; ++n) {
    rho.re[n] = Vec4(_mm256_setr_pd(lanes[0][n], lanes[1][n], lanes[2][n], lanes[3][n]));
    rho.im[n] = Vec4(_mm256_setr_pd(lanes[0][16 + n], lanes[1][16 + n], lanes[2][16 + n], lanes[3][16 + n]));
  }
  run_window(rho, drive, rates, [&](std::size_t node, Vec4& hr, Vec4& hi) {
    hr = Vec4(_mm256_loadu_pd(drive.h_re + node * kBatch));
    hi = Vec4(_mm256_loadu_pd(drive.h_im + node * kBatch));
  });
  alignas(32) double buf[4];
  for (int n = 0; n < 16; ++n) {
    _mm256_store_pd(buf, rho.re[n].v);
    for (std::size_t l = 0; l < kBatch; ++l) lanes[l][n] = buf[l];
    _mm256_store_pd(buf, rho.im[n].v);
    for (std::size_t l = 0; l < kBatch; ++l) lanes[l][16 + n] = buf[l];
  }
}

}  // namespace qdsim::simd
