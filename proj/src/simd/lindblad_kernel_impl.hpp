#pragma once

// Shared RK4 body. Included by each ISA translation unit and instantiated
// with that unit's vector type; everything here has internal linkage so the
// per-ISA code generation never leaks across units.

#include <cstddef>

#include "qdsim/simd/lindblad_kernel.hpp"

namespace qdsim::simd {
namespace {

template <class V>
struct Rho {
  V re[16];
  V im[16];
};

constexpr bool is_trion(int i) { return i >= 2; }

// dρ/dt = −i[H, ρ] + decay + dephasing, with H non-zero only at
// (g−,t−), (t−,g−) and (t−,t−).
template <class V>
inline void derivative(const Rho<V>& r, V h_re, V h_im, const LindbladRates& k, Rho<V>& out) {
  const V delta(k.trion_energy);
  const V half_t1(0.5 * (k.decay_vertical + k.decay_cross));
  const V t1_rate(k.decay_vertical + k.decay_cross);
  const V kv(k.decay_vertical);
  const V kc(k.decay_cross);
  const V four(4.0);
  const V omega_sq = four * (h_re * h_re + h_im * h_im);
  const V dephase = V(k.gamma_phi) + V(k.eid_coeff) * omega_sq;
  const V zero(0.0);

#pragma GCC unroll 4
  for (int i = 0; i < 4; ++i) {
#pragma GCC unroll 4
    for (int j = 0; j < 4; ++j) {
      // A = Hρ − ρH
      V a_re = zero;
      V a_im = zero;
      if (i == 0) {  // h ρ_{2j}
        const V xr = r.re[8 + j], xi = r.im[8 + j];
        a_re = a_re + (h_re * xr - h_im * xi);
        a_im = a_im + (h_re * xi + h_im * xr);
      } else if (i == 2) {  // h* ρ_{0j} + δ ρ_{2j}
        const V xr = r.re[j], xi = r.im[j];
        a_re = a_re + (h_re * xr + h_im * xi) + delta * r.re[8 + j];
        a_im = a_im + (h_re * xi - h_im * xr) + delta * r.im[8 + j];
      }
      if (j == 0) {  // − ρ_{i2} h*
        const V xr = r.re[4 * i + 2], xi = r.im[4 * i + 2];
        a_re = a_re - (xr * h_re + xi * h_im);
        a_im = a_im - (xi * h_re - xr * h_im);
      } else if (j == 2) {  // − ρ_{i0} h − ρ_{i2} δ
        const V xr = r.re[4 * i], xi = r.im[4 * i];
        a_re = a_re - (xr * h_re - xi * h_im) - r.re[4 * i + 2] * delta;
        a_im = a_im - (xr * h_im + xi * h_re) - r.im[4 * i + 2] * delta;
      }
      // −iA
      V d_re = a_im;
      V d_im = zero - a_re;

      const int n_trion = (is_trion(i) ? 1 : 0) + (is_trion(j) ? 1 : 0);
      const int idx = 4 * i + j;
      V damp = zero;
      if (n_trion == 1) damp = half_t1 + dephase;
      else if (n_trion == 2) damp = t1_rate;
      if (n_trion != 0) {
        d_re = d_re - damp * r.re[idx];
        d_im = d_im - damp * r.im[idx];
      }
      if (idx == 0) d_re = d_re + (kv * r.re[10] + kc * r.re[15]);
      if (idx == 5) d_re = d_re + (kc * r.re[10] + kv * r.re[15]);
      out.re[idx] = d_re;
      out.im[idx] = d_im;
    }
  }
}

template <class V>
inline void axpy(const Rho<V>& x, V a, const Rho<V>& k, Rho<V>& out) {
  for (int n = 0; n < 16; ++n) {
    out.re[n] = x.re[n] + a * k.re[n];
    out.im[n] = x.im[n] + a * k.im[n];
  }
}

// Loads drive for node `node` into a V; Loader abstracts the lane gather.
template <class V, class Loader>
inline void run_window(Rho<V>& rho, const DriveBlock& drive, const LindbladRates& rates, Loader load) {
  const V half_dt(0.5 * drive.dt);
  const V full_dt(drive.dt);
  const V sixth_dt(drive.dt / 6.0);
  const V two(2.0);
  Rho<V> k1, k2, k3, k4, tmp;
  for (std::size_t s = 0; s < drive.n_steps; ++s) {
    const std::size_t node = drive.first_node + 2 * s;
    V hr0, hi0, hr1, hi1, hr2, hi2;
    load(node, hr0, hi0);
    load(node + 1, hr1, hi1);
    load(node + 2, hr2, hi2);
    derivative(rho, hr0, hi0, rates, k1);
    axpy(rho, half_dt, k1, tmp);
    derivative(tmp, hr1, hi1, rates, k2);
    axpy(rho, half_dt, k2, tmp);
    derivative(tmp, hr1, hi1, rates, k3);
    axpy(rho, full_dt, k3, tmp);
    derivative(tmp, hr2, hi2, rates, k4);
    for (int n = 0; n < 16; ++n) {
      rho.re[n] = rho.re[n] + sixth_dt * (k1.re[n] + two * k2.re[n] + two * k3.re[n] + k4.re[n]);
      rho.im[n] = rho.im[n] + sixth_dt * (k1.im[n] + two * k2.im[n] + two * k3.im[n] + k4.im[n]);
    }
  }
}

}  // namespace
}  // namespace qdsim::simd
