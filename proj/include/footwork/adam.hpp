#pragma once

#include <iosfwd>

#include "footwork/mlp.hpp"

namespace footwork::net {

/// Adam with the usual (0.9, 0.999, 1e-8) moments, one state slot per
/// parameter tensor of an Mlp.
class Adam {
 public:
  Adam() = default;
  Adam(const Mlp& like, double lr);

  void step(Mlp& net, const MlpGrads& grads);
  double learning_rate() const { return lr_; }
  void set_learning_rate(double lr) { lr_ = lr; }

  void save(std::ostream& os) const;
  void load(std::istream& is);

 private:
  double lr_ = 3e-4;
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  double eps_ = 1e-8;
  long t_ = 0;
  MlpGrads m_, v_;
};

}  // namespace footwork::net
