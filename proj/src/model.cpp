#include "fracdiff/model.hpp"

#include <cmath>
#include <sstream>

#include "fracdiff/errors.hpp"
#include "fracdiff/specfun.hpp"

namespace fracdiff {

void ModelParams::validate() const {
  std::ostringstream os;
  if (!(gamma > 0.0 && gamma <= 1.0)) os << "gamma must lie in (0, 1], got " << gamma;
  else if (!(d_coeff > 0.0)) os << "d_coeff must be positive, got " << d_coeff;
  else if (n_dim < 1) os << "n_dim must be >= 1, got " << n_dim;
  else if (kernel == KernelKind::power_law && !(alpha_mem > 0.0)) os << "alpha_mem must be positive, got " << alpha_mem;
  else return;
  throw AdmissibilityError(os.str());
}

LaplaceGreenParams LaplaceGreenParams::from(const ModelParams& p) {
  const double two_theta = 2.0 + p.theta;
  if (!(two_theta > 0.0)) throw AdmissibilityError("2 + theta must be positive");
  const double lambda = (two_theta - p.n_dim) / two_theta;
  return {0.5 * two_theta, lambda, lambda};
}

double LaplaceGreenParams::d_tilde(double s, const ModelParams& p) const {
  return p.kernel == KernelKind::impulsive ? p.d_coeff : p.d_coeff * std::pow(s, -p.alpha_mem);
}

double LaplaceGreenParams::a_of_s(double s, const ModelParams& p) const {
  return std::sqrt(std::pow(s, p.gamma) / d_tilde(s, p)) / v;
}

double LaplaceGreenParams::c_of_s(double s, const ModelParams& p) const {
  const double two_theta = 2.0 * v;
  const double w = 0.5 * a_of_s(s, p);
  return two_theta / (gamma_fn(p.n_dim / two_theta).value * s) *
         std::pow(w, (two_theta + p.n_dim) / two_theta) * std::pow(2.0 * w, -delta);
}

void Profile::validate() const {
  if (x.size() != values.size() || (error.size() != 0 && error.size() != x.size()))
    throw DomainError("Profile: grid and value sizes differ");
  for (Eigen::Index i = 1; i < x.size(); ++i)
    if (!(x(i) > x(i - 1))) throw DomainError("Profile: grid must be strictly increasing");
}

}  // namespace fracdiff
