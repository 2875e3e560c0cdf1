#include "nlsysid/activation.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace nlsysid {

namespace {

std::string format_beta(double beta) {
  std::ostringstream os;
  os << beta;
  return os.str();
}

}  // namespace

Activation::Activation(Kind kind, double beta, std::shared_ptr<const Activation> base)
    : kind_(kind), beta_(beta), min_slope_(0.0), is_odd_(false), base_(std::move(base)) {
  switch (kind_) {
    case Kind::Linear:
      min_slope_ = 1.0;
      is_odd_ = true;
      break;
    case Kind::ReLU:
      min_slope_ = 0.0;
      break;
    case Kind::LeakyReLU:
      min_slope_ = beta_;
      is_odd_ = beta_ == 1.0;
      break;
    case Kind::Blended:
      min_slope_ = (1.0 - beta_) * base_->min_slope() + beta_;
      is_odd_ = base_->is_odd();
      break;
  }
}

Activation Activation::linear() { return Activation(Kind::Linear, 0.0, nullptr); }

Activation Activation::relu() { return Activation(Kind::ReLU, 0.0, nullptr); }

Activation Activation::leaky_relu(double beta) {
  if (!(beta >= 0.0 && beta <= 1.0)) {
    throw std::invalid_argument("leaky_relu: beta must lie in [0, 1], got " + format_beta(beta));
  }
  return Activation(Kind::LeakyReLU, beta, nullptr);
}

Activation Activation::blend(const Activation& base, double beta) {
  if (!(beta > 0.0 && beta <= 1.0)) {
    throw std::invalid_argument("blend: beta must lie in (0, 1], got " + format_beta(beta));
  }
  return Activation(Kind::Blended, beta, std::make_shared<const Activation>(base));
}

double Activation::eval(double x) const {
  switch (kind_) {
    case Kind::Linear:
      return x;
    case Kind::ReLU:
      return x > 0.0 ? x : 0.0;
    case Kind::LeakyReLU:
      return x >= 0.0 ? x : beta_ * x;
    case Kind::Blended:
      return (1.0 - beta_) * base_->eval(x) + beta_ * x;
  }
  return x;
}

double Activation::deriv(double x) const {
  switch (kind_) {
    case Kind::Linear:
      return 1.0;
    case Kind::ReLU:
      return x >= 0.0 ? 1.0 : 0.0;
    case Kind::LeakyReLU:
      return x >= 0.0 ? 1.0 : beta_;
    case Kind::Blended:
      return (1.0 - beta_) * base_->deriv(x) + beta_;
  }
  return 1.0;
}

Vector Activation::eval(const Vector& x) const {
  Vector out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) out(i) = eval(x(i));
  return out;
}

Vector Activation::deriv(const Vector& x) const {
  Vector out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) out(i) = deriv(x(i));
  return out;
}

std::string Activation::label() const {
  switch (kind_) {
    case Kind::Linear:
      return "linear";
    case Kind::ReLU:
      return "relu";
    case Kind::LeakyReLU:
      return "leaky_relu_" + format_beta(beta_);
    case Kind::Blended:
      return "blended_" + base_->label() + "_" + format_beta(beta_);
  }
  return "unknown";
}

bool operator==(const Activation& a, const Activation& b) {
  if (a.kind_ != b.kind_ || a.beta_ != b.beta_) return false;
  if (a.kind_ != Activation::Kind::Blended) return true;
  return *a.base_ == *b.base_;
}

nlohmann::json to_json(const Activation& act) {
  using Kind = Activation::Kind;
  switch (act.kind()) {
    case Kind::Linear:
      return {{"kind", "linear"}};
    case Kind::ReLU:
      return {{"kind", "relu"}};
    case Kind::LeakyReLU:
      return {{"kind", "leaky_relu"}, {"beta", act.beta()}};
    case Kind::Blended:
      return {{"kind", "blended"}, {"base", to_json(*act.base())}, {"beta", act.beta()}};
  }
  return {};
}

Activation activation_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("kind")) {
    throw std::invalid_argument("activation descriptor needs a \"kind\" field");
  }
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "linear") return Activation::linear();
  if (kind == "relu") return Activation::relu();
  if (kind == "leaky_relu") return Activation::leaky_relu(j.at("beta").get<double>());
  if (kind == "blended") {
    return Activation::blend(activation_from_json(j.at("base")), j.at("beta").get<double>());
  }
  throw std::invalid_argument("unknown activation kind: " + kind);
}

Activation parse_activation(const std::string& text) {
  const auto colon = text.find(':');
  const std::string name = text.substr(0, colon);
  if (colon == std::string::npos) {
    if (name == "linear") return Activation::linear();
    if (name == "relu") return Activation::relu();
    throw std::invalid_argument("unknown activation: " + text);
  }
  double beta = 0.0;
  try {
    beta = std::stod(text.substr(colon + 1));
  } catch (const std::exception&) {
    throw std::invalid_argument("bad activation parameter in: " + text);
  }
  if (name == "leaky_relu") return Activation::leaky_relu(beta);
  if (name == "blend_relu") return Activation::blend(Activation::relu(), beta);
  throw std::invalid_argument("unknown activation: " + text);
}

}  // namespace nlsysid
