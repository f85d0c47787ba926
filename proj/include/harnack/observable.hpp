#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "harnack/linalg.hpp"
#include "harnack/spectral_model.hpp"

namespace harnack {

enum class ObservableKind { cosine, tanh, product_sigmoid, floor_shifted, linear, quadratic, sign };

std::string observable_kind_name(ObservableKind kind);
ObservableKind parse_observable_kind(const std::string& name);

// Ridge variable s = omega <x, d> + theta.
struct Ridge {
  Vec direction;
  double omega = 1.0;
  double theta = 0.0;
};

// phi(x) = offset + amplitude * g(s_1, ..., s_m), floored for floor_shifted.
// Directions shorter than x act as if zero-padded.
class Observable {
 public:
  static Observable cosine(Vec direction, double omega = 1.0, double phase = 0.0, double amplitude = 1.0,
                           double offset = 0.0);
  static Observable tanh(Vec direction, double omega, double center, double amplitude = 1.0, double offset = 0.0);
  static Observable product_sigmoid(std::vector<Vec> directions, Vec omegas, Vec centers, double amplitude = 1.0,
                                    double offset = 0.0);
  static Observable floor_shifted(Vec direction, double omega, double phase, double amplitude, double offset,
                                  double floor = 1e-3);
  // Unbounded; generator and hypercontractivity tests only.
  static Observable linear(Vec direction, double scale = 1.0, double offset = 0.0);
  static Observable quadratic(Vec direction, double scale = 1.0, double offset = 0.0);
  static Observable constant(double value);
  // Discontinuous at the hyperplane; its gradient is taken as zero.
  static Observable sign(Vec direction, double center = 0.0, double amplitude = 1.0, double offset = 0.0);

  ObservableKind kind() const noexcept { return kind_; }
  const std::vector<Ridge>& ridges() const noexcept { return ridges_; }
  double amplitude() const noexcept { return amplitude_; }
  double offset() const noexcept { return offset_; }
  double floor() const noexcept { return floor_; }

  double operator()(std::span<const double> x) const;
  Vec gradient(std::span<const double> x) const;
  // ||D_C phi||_C = ||C^{1/2} D phi||.
  double cm_gradient_norm(const OperatorPair& pair, std::span<const double> x) const;
  // Tr[C D^2 phi](x).
  double trace_c_hessian(const OperatorPair& pair, std::span<const double> x) const;

  bool bounded() const noexcept;
  double sup_abs() const noexcept;
  double inf_value() const noexcept;
  bool positive() const noexcept { return inf_value() > 0.0; }
  // 1-based index of the highest mode any direction touches.
  std::size_t support() const noexcept;
  std::string id() const;

 private:
  Observable(ObservableKind kind, std::vector<Ridge> ridges, double amplitude, double offset, double floor);

  Vec ridge_values(std::span<const double> x) const;
  double profile(std::span<const double> s) const;
  // First and second partial derivatives of the profile in the ridge variables.
  void profile_derivatives(std::span<const double> s, Vec& d1, Vec& d2) const;
  bool floored_at(std::span<const double> s) const;

  ObservableKind kind_;
  std::vector<Ridge> ridges_;
  double amplitude_;
  double offset_;
  double floor_;
};

}  // namespace harnack
