#include "lindblad_kernel_impl.hpp"

namespace qdsim::simd {

void integrate_window_scalar(std::array<LaneState, kBatch>& lanes, const DriveBlock& drive,
                             const LindbladRates& rates) {
  for (std::size_t lane = 0; lane < drive.active_lanes && lane < kBatch; ++lane) {
    Rho<double> rho;
    for (int n = 0; n < 16; ++n) {
      rho.re[n] = lanes[lane][n];
      rho.im[n] = lanes[lane][16 + n];
    }
    run_window(rho, drive, rates, [&](std::size_t node, double& hr, double& hi) {
      hr = drive.h_re[node * kBatch + lane];
      hi = drive.h_im[node * kBatch + lane];
    });
    for (int n = 0; n < 16; ++n) {
      lanes[lane][n] = rho.re[n];
      lanes[lane][16 + n] = rho.im[n];
    }
  }
}

}  // namespace qdsim::simd
