#pragma once

#include <memory>
#include <string>

#include <json.hpp>

#include "nlsysid/linalg.hpp"

namespace nlsysid {

/// A monotone, 1-Lipschitz activation with φ(0) = 0.
///
/// `min_slope()` is the β for which 1 ≥ φ′(x) ≥ β holds everywhere. ReLU is
/// admitted with β = 0; anything that needs a strictly increasing activation
/// checks `min_slope() > 0` itself.
///
/// At kinks `deriv` returns the right derivative, so deriv(ReLU, 0) = 1.
class Activation {
 public:
  enum class Kind { Linear, ReLU, LeakyReLU, Blended };

  static Activation linear();
  static Activation relu();
  /// max(βx, x); β ∈ [0, 1].
  static Activation leaky_relu(double beta);
  /// x ↦ (1−β)·base(x) + β·x with β ∈ (0, 1]. `base` must be increasing,
  /// 1-Lipschitz and vanish at zero, which every kind here satisfies.
  static Activation blend(const Activation& base, double beta);

  double eval(double x) const;
  double deriv(double x) const;

  /// Entrywise lifts.
  Vector eval(const Vector& x) const;
  Vector deriv(const Vector& x) const;

  Kind kind() const { return kind_; }
  /// Parameter of LeakyReLU / Blended, 0 otherwise.
  double beta() const { return beta_; }
  double min_slope() const { return min_slope_; }
  bool is_odd() const { return is_odd_; }
  const Activation* base() const { return base_.get(); }

  /// Short stable label, e.g. "leaky_relu_0.25". Used for output file names.
  std::string label() const;

  friend bool operator==(const Activation& a, const Activation& b);

 private:
  Activation(Kind kind, double beta, std::shared_ptr<const Activation> base);

  Kind kind_;
  double beta_;
  double min_slope_;
  bool is_odd_;
  std::shared_ptr<const Activation> base_;
};

/// {"kind": "leaky_relu", "beta": 0.25}, {"kind": "relu"}, {"kind": "linear"},
/// {"kind": "blended", "base": {...}, "beta": 0.5}.
nlohmann::json to_json(const Activation& act);
Activation activation_from_json(const nlohmann::json& j);

/// Compact CLI form: "linear", "relu", "leaky_relu:0.25", "blend_relu:0.25".
Activation parse_activation(const std::string& text);

}  // namespace nlsysid
