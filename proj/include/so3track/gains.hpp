#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace so3track {

/// The four tracking strategies: almost-global (AGTS), global via a shifted
/// reference (GTS), and their adaptive counterparts (aAGTS, aGTS).
enum class ControllerMode { kAgts, kGts, kAdaptiveAgts, kAdaptiveGts };

constexpr bool is_adaptive(ControllerMode mode) {
  return mode == ControllerMode::kAdaptiveAgts ||
         mode == ControllerMode::kAdaptiveGts;
}

constexpr bool uses_shifted_reference(ControllerMode mode) {
  return mode == ControllerMode::kGts || mode == ControllerMode::kAdaptiveGts;
}

std::string_view to_string(ControllerMode mode);

/// Case-sensitive: "AGTS", "GTS", "aAGTS", "aGTS" ("agts" and "aGTS" differ
/// only by case). "adaptive-agts" and "adaptive-gts" are accepted aliases.
std::optional<ControllerMode> parse_controller_mode(std::string_view name);

class InvalidGains : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/**
 * Controller constants.
 *
 * k_r, k_omega: attitude and angular-velocity gains.
 * a: fraction of the attitude-error ball, 0 < a < 1.
 * mu: cross-term weight of the Lyapunov function.
 * epsilon: scaling applied to mu and to the shifted-reference parameters.
 * k_delta, delta_max: adaptation gain and known disturbance bound.
 */
struct GainSet {
  double k_r = 0.0;
  double k_omega = 0.0;
  double k_delta = 0.0;
  double a = 0.0;
  double mu = 0.0;
  double epsilon = 0.0;
  double delta_max = 0.0;

  /// Two-gain tuning rule: a = epsilon and mu = epsilon * mu_upper_bound.
  static GainSet recipe(double k_r, double k_omega, double epsilon,
                        double k_delta = 0.0, double delta_max = 0.0);
};

/// Supremum of admissible mu: 4(1-a) k_r k_omega / (4(1-a) k_r + k_omega^2).
double mu_upper_bound(double k_r, double k_omega, double a);

/// B = 2a (sqrt(k_r) - mu)/(sqrt(k_r) + mu) k_r - delta_max^2 / (2 k_delta).
/// Positive B is the adaptive admissibility condition.
double adaptive_margin(const GainSet& gains);

}  // namespace so3track
