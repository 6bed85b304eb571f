#include "qoc/controls.hpp"

#include <cmath>
#include <stdexcept>

namespace qoc {

ControlParameterization ControlParameterization::create(
    double duration_ns, double knot_spacing_ns,
    const std::vector<std::vector<double>>& carrier_mhz) {
  if (duration_ns <= 0.0) throw std::invalid_argument("duration_ns must be positive");
  if (knot_spacing_ns <= 0.0) throw std::invalid_argument("knot_spacing_ns must be positive");

  ControlParameterization p;
  p.duration_ns = duration_ns;
  p.knot_spacing_ns = knot_spacing_ns;

  // d1 = ceil(T/dtau) + 2, guarding against an exact ratio landing a hair
  // above an integer in floating point.
  const double ratio = duration_ns / knot_spacing_ns;
  const double rounded = std::round(ratio);
  const long long intervals = (std::abs(ratio - rounded) < 1e-9)
                                  ? static_cast<long long>(rounded)
                                  : static_cast<long long>(std::ceil(ratio));
  p.num_splines = static_cast<int>(intervals) + 2;
  if (p.num_splines < 3) throw std::invalid_argument("duration too short for the B-spline basis");

  p.carrier_radns.reserve(carrier_mhz.size());
  for (const auto& per_qubit : carrier_mhz) {
    std::vector<double> w;
    w.reserve(per_qubit.size());
    for (double f : per_qubit) w.push_back(mhz_to_radns(f));
    p.carrier_radns.push_back(std::move(w));
  }
  return p;
}

int ControlParameterization::total_params() const {
  int carriers = 0;
  for (const auto& w : carrier_radns) carriers += static_cast<int>(w.size());
  return 2 * num_splines * carriers;
}

int ControlParameterization::qubit_offset(int qubit) const {
  int offset = 0;
  for (int j = 0; j < qubit; ++j) offset += 2 * num_splines * num_carriers(j);
  return offset;
}

int ControlParameterization::param_index(int qubit, int carrier, int spline, int part) const {
  return qubit_offset(qubit) + 2 * num_splines * carrier + part * num_splines + spline;
}

ControlParameterization::ParamKey ControlParameterization::param_key(int index) const {
  if (index < 0 || index >= total_params()) throw std::out_of_range("parameter index out of range");
  int qubit = 0;
  while (index >= 2 * num_splines * num_carriers(qubit)) {
    index -= 2 * num_splines * num_carriers(qubit);
    ++qubit;
  }
  const int carrier = index / (2 * num_splines);
  index -= carrier * 2 * num_splines;
  const int part = index / num_splines;
  return ParamKey{qubit, carrier, index - part * num_splines, part};
}

double bspline_basis(int spline, double t, const ControlParameterization& param) {
  if (spline < 0 || spline >= param.num_splines)
    throw std::out_of_range("spline index out of range");
  const double x = (t - param.spline_center(spline)) / param.knot_spacing_ns;
  const double ax = std::abs(x);
  if (ax <= 0.5) return 0.75 - x * x;
  if (ax <= 1.5) {
    const double w = 1.5 - ax;
    return 0.5 * w * w;
  }
  return 0.0;
}

Complex eval_envelope(int qubit, int carrier, double t, const RealVector& alpha,
                      const ControlParameterization& param) {
  Complex env(0.0, 0.0);
  for_each_active_spline(t, param, [&](int s, double b) {
    env += Complex(alpha[param.param_index(qubit, carrier, s, 0)],
                   alpha[param.param_index(qubit, carrier, s, 1)]) *
           b;
  });
  return env;
}

Complex eval_control(int qubit, double t, const RealVector& alpha,
                     const ControlParameterization& param) {
  Complex d(0.0, 0.0);
  for (int f = 0; f < param.num_carriers(qubit); ++f) {
    d += eval_envelope(qubit, f, t, alpha, param) *
         std::polar(1.0, t * param.carrier_radns[qubit][f]);
  }
  return d;
}

Complex eval_control_derivative(int qubit, double t, int index,
                                const ControlParameterization& param) {
  const auto key = param.param_key(index);
  if (key.qubit != qubit) return Complex(0.0, 0.0);
  const Complex g = bspline_basis(key.spline, t, param) *
                    std::polar(1.0, t * param.carrier_radns[qubit][key.carrier]);
  return key.part == 0 ? g : Complex(0.0, 1.0) * g;
}

EnergyPenalty energy_penalty(const RealVector& alpha, const ControlParameterization& param,
                             double dt, long long num_steps) {
  EnergyPenalty e;
  e.grad = RealVector::Zero(param.total_params());
  for (long long k = 0; k <= num_steps; ++k) {
    const double w = (k == 0 || k == num_steps) ? 0.5 * dt : dt;
    const double t = static_cast<double>(k) * dt;
    for (int j = 0; j < param.num_qubits(); ++j) {
      const Complex d = eval_control(j, t, alpha, param);
      e.value += w * std::norm(d);
      for (int f = 0; f < param.num_carriers(j); ++f) {
        // d(|d|^2)/da = 2 Re(conj(g) d) with g the (alpha-independent)
        // derivative of d_j; the im-part derivative is i*g_re.
        const Complex phase = std::polar(1.0, t * param.carrier_radns[j][f]);
        for_each_active_spline(t, param, [&](int s, double b) {
          const Complex g = b * phase;
          const Complex cg_d = std::conj(g) * d;
          e.grad[param.param_index(j, f, s, 0)] += w * 2.0 * cg_d.real();
          e.grad[param.param_index(j, f, s, 1)] += w * 2.0 * cg_d.imag();
        });
      }
    }
  }
  return e;
}

}  // namespace qoc
