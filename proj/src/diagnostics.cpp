#include "so3track/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace so3track {

double eval_v0(const Matrix3& r, const Vector3& omega,
               const ReferenceSample& ref, const GainSet& gains) {
  return 0.25 * gains.k_r * (r - ref.rd.matrix()).squaredNorm() +
         0.5 * (omega - ref.omega_d).squaredNorm();
}

double eval_v(const Matrix3& r, const Vector3& omega, const ReferenceSample& ref,
              const GainSet& gains) {
  const Vector3 e_r = attitude_error_vector(r, ref.rd.matrix());
  return eval_v0(r, omega, ref, gains) + gains.mu * e_r.dot(omega - ref.omega_d);
}

double eval_v_bar(const Matrix3& r, const Vector3& omega,
                  const ReferenceSample& ref, const GainSet& gains,
                  const Vector3& estimate, const Vector3& true_delta) {
  return eval_v(r, omega, ref, gains) +
         (true_delta - estimate).squaredNorm() / (2.0 * gains.k_delta);
}

std::pair<double, double> symmetric_eigenvalues(const Matrix2& m) {
  const double mean = 0.5 * (m(0, 0) + m(1, 1));
  const double half_gap = 0.5 * (m(0, 0) - m(1, 1));
  const double radius = std::hypot(half_gap, 0.5 * (m(0, 1) + m(1, 0)));
  return {mean - radius, mean + radius};
}

QuadraticForms quadratic_forms(const GainSet& g) {
  const double c = 1.0 / (2.0 * std::sqrt(2.0));
  QuadraticForms q;
  q.w1 << 0.25 * g.k_r, -c * g.mu,
          -c * g.mu, 0.5;
  q.w2 << 0.25 * g.k_r, c * g.mu,
          c * g.mu, 0.5;
  q.w3 << 0.5 * (1.0 - g.a) * g.mu * g.k_r, -c * g.mu * g.k_omega,
          -c * g.mu * g.k_omega, g.k_omega - g.mu;
  return q;
}

StabilityMatrices stability_matrices(const GainSet& gains) {
  const QuadraticForms q = quadratic_forms(gains);
  const double w3_min = symmetric_eigenvalues(q.w3).first;
  if (!(w3_min > 0.0)) {
    std::ostringstream msg;
    msg << "W3 is not positive-definite (lambda_min = " << w3_min << ")";
    throw InvalidGains(msg.str());
  }
  const double w2_max = symmetric_eigenvalues(q.w2).second;
  return {q.w1, q.w2, q.w3, w3_min / w2_max};
}

EnvelopeReport check_envelope(std::span<const LyapunovSample> series,
                              double sigma, double tol, double step_tol) {
  EnvelopeReport report;
  if (series.empty()) {
    return report;
  }
  const LyapunovSample& first = series.front();
  for (std::size_t k = 0; k < series.size(); ++k) {
    const LyapunovSample& s = series[k];
    const double bound = first.v * std::exp(-sigma * (s.t - first.t));
    if (bound > 0.0) {
      report.max_envelope_ratio = std::max(report.max_envelope_ratio, s.v / bound);
    }
    if (s.v > (1.0 + tol) * bound + std::numeric_limits<double>::min()) {
      std::ostringstream msg;
      msg << "V = " << s.v << " exceeds envelope " << bound;
      report.violations.push_back({s.t, msg.str()});
    }
    if (k > 0) {
      const double rise = s.v0 - series[k - 1].v0;
      report.max_v0_increase = std::max(report.max_v0_increase, rise);
      if (rise > step_tol) {
        std::ostringstream msg;
        msg << "V0 increased by " << rise;
        report.violations.push_back({s.t, msg.str()});
      }
    }
  }
  return report;
}

double max_step_increase(std::span<const double> values) {
  double worst = 0.0;
  for (std::size_t k = 1; k < values.size(); ++k) {
    worst = std::max(worst, values[k] - values[k - 1]);
  }
  return worst;
}

double decay_extrapolation_ratio(std::span<const double> times,
                                 std::span<const double> values, double rate,
                                 double t_fit, double floor) {
  double c = 0.0;
  for (std::size_t k = 0; k < times.size() && times[k] <= t_fit; ++k) {
    c = std::max(c, values[k] * std::exp(rate * times[k]));
  }
  double worst = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] <= t_fit) {
      continue;
    }
    const double bound = c * std::exp(-rate * times[k]) + floor;
    worst = std::max(worst, values[k] / bound);
  }
  return worst;
}

}  // namespace so3track
