#pragma once

#include <array>

#include "gradhom/tensor.hpp"

namespace gradhom {

struct MooneyRivlinParams {
  double c1 = 2000.0;  // MPa
  double c2 = 1000.0;  // MPa
  double c() const { return (c1 + c2) / 3.0; }
  double d() const { return 2.0 * (c1 + 2.0 * c2); }
};

struct FiberParams {
  MooneyRivlinParams matrix;
  double zeta = 0.5;
  double a_f = 15000.0;  // MPa
  double b_f = 3000.0;   // MPa
  double c_f = 1.25;     // N
  Vec3 L1{-1.0 / 2.0615528128088303, -1.0 / 2.0615528128088303, 1.5 / 2.0615528128088303};
  Vec3 L2{-1.0 / 2.0615528128088303, -1.0 / 2.0615528128088303, -1.5 / 2.0615528128088303};
  double beta() const;
};

FiberParams default_fiber_params();

/// Stresses and tangents at one point in the packed 12-per-component layout:
/// slot a < 3 is F_{iJ} with J = a, slot a >= 3 is the pair (J,K) = ((a-3)/3, (a-3)%3).
/// S[12*i + a] holds P or the hyperstress; T[(12*i + a)*36 + 12*s + b] the derivative of
/// S[12*i + a] with respect to the kinematic slot (s, b).
struct PackedResponse {
  double psi = 0.0;
  std::array<double, 36> S{};
  std::array<double, 1296> T{};
  bool second_gradient = false;  // hyperstress and mixed tangents may be nonzero
};

struct MaterialResponse {
  double psi = 0.0;
  Tensor<2> P;
  Tensor<3> PP;  // hyperstress
  Tensor<4> C;
  Tensor<5> D;   // dP/dFF
  Tensor<5> E;   // dPP/dF
  Tensor<6> G;
};

MaterialResponse unpack(const PackedResponse& r);

class Material {
 public:
  enum class Kind { MooneyRivlin, Fiber };

  static Material mooney_rivlin(MooneyRivlinParams p);
  static Material fiber(FiberParams p);

  Kind kind() const { return kind_; }
  const MooneyRivlinParams& mr() const { return mr_; }
  const FiberParams& fib() const { return fib_; }
  bool second_gradient() const { return kind_ == Kind::Fiber; }

  /// Fills psi and S always, T only when tangents is set.
  void evaluate(const double* F, const double* FF, PackedResponse& out, bool tangents = true) const;
  MaterialResponse response(const Mat3& F, const Tensor<3>& FF) const;
  double energy(const Mat3& F, const Tensor<3>& FF) const;

  /// All stiffness parameters multiplied by factor.
  Material scaled(double factor) const;
  /// Only the first-gradient parameters (c1, c2, a_F, b_F) multiplied by factor.
  Material scaled_first_gradient(double factor) const;

 private:
  Kind kind_ = Kind::MooneyRivlin;
  MooneyRivlinParams mr_;
  FiberParams fib_;
};

MaterialResponse mooney_rivlin(const Mat3& F, const MooneyRivlinParams& p);
MaterialResponse fiber_reinforced(const Mat3& F, const Tensor<3>& FF, const FiberParams& p);
Material scaled(const Material& m, double factor);

}  // namespace gradhom
