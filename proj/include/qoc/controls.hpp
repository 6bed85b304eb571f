#pragma once

#include <vector>

#include "qoc/model.hpp"

namespace qoc {

/// Carrier-wave control layout: per qubit j and carrier frequency Omega_j^f,
/// a complex envelope is expanded in d1 cardinal quadratic B-splines on a
/// uniform knot grid of spacing dtau covering [0, T]. Spline centers sit at
/// (s - 1/2) dtau for s = 0..d1-1, so the outermost centers extend half a
/// knot beyond each domain end and the basis forms a partition of unity on
/// the whole interval.
///
/// Parameter vector layout: per qubit (ascending), per carrier (ascending),
/// a block of 2*d1 reals, the d1 real-part coefficients followed by the d1
/// imaginary-part coefficients.
struct ControlParameterization {
  double duration_ns = 0.0;
  double knot_spacing_ns = 3.0;
  int num_splines = 0;                             // d1 = ceil(T/dtau) + 2
  std::vector<std::vector<double>> carrier_radns;  // Omega_j^f, rad/ns

  static ControlParameterization create(double duration_ns, double knot_spacing_ns,
                                        const std::vector<std::vector<double>>& carrier_mhz);

  int num_qubits() const { return static_cast<int>(carrier_radns.size()); }
  int num_carriers(int qubit) const { return static_cast<int>(carrier_radns[qubit].size()); }
  int total_params() const;
  int qubit_offset(int qubit) const;
  int param_index(int qubit, int carrier, int spline, int part) const;

  struct ParamKey {
    int qubit, carrier, spline, part;  // part: 0 = real, 1 = imaginary
  };
  ParamKey param_key(int index) const;

  double spline_center(int spline) const { return (spline - 0.5) * knot_spacing_ns; }
};

/// Cardinal quadratic B-spline centered on the knot grid: 3/4 - x^2 on
/// |x| <= 1/2, (3/2 - |x|)^2 / 2 on 1/2 < |x| <= 3/2, zero outside, with
/// x = (t - center_s) / dtau. Throws std::out_of_range for a bad index.
double bspline_basis(int spline, double t, const ControlParameterization& param);

/// Visits the (at most three) splines whose support contains t.
template <typename Fn>
inline void for_each_active_spline(double t, const ControlParameterization& param, Fn&& fn) {
  const double u = t / param.knot_spacing_ns;
  const int s0 = static_cast<int>(std::floor(u));
  for (int s = s0; s < s0 + 3; ++s) {
    if (s < 0 || s >= param.num_splines) continue;
    const double x = u - (s - 0.5);
    const double ax = std::abs(x);
    double b = 0.0;
    if (ax <= 0.5) {
      b = 0.75 - x * x;
    } else if (ax <= 1.5) {
      const double w = 1.5 - ax;
      b = 0.5 * w * w;
    }
    if (b != 0.0) fn(s, b);
  }
}

/// Complex envelope d~_{jf}(t) = sum_s (a^re + i a^im) B_s(t); linear in alpha.
Complex eval_envelope(int qubit, int carrier, double t, const RealVector& alpha,
                      const ControlParameterization& param);

/// Control function d_j(t) = sum_f d~_{jf}(t) e^{i t Omega_j^f}. Times are
/// absolute, so evaluation is identical inside any window decomposition.
Complex eval_control(int qubit, double t, const RealVector& alpha,
                     const ControlParameterization& param);

/// d(d_j)/d(alpha_l); zero when alpha_l belongs to another qubit, and
/// independent of alpha (the parameterization is linear).
Complex eval_control_derivative(int qubit, double t, int index,
                                const ControlParameterization& param);

struct EnergyPenalty {
  double value = 0.0;
  RealVector grad;
};

/// E(alpha) = sum_j int_0^T |d_j|^2 dt by the trapezoid rule on the stepping
/// grid (num_steps intervals of width dt), with its exact gradient.
EnergyPenalty energy_penalty(const RealVector& alpha, const ControlParameterization& param,
                             double dt, long long num_steps);

}  // namespace qoc
