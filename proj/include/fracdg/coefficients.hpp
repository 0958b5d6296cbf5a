// Problem coefficients: bulk permeability per subdomain, fracture normal and
// tangential permeabilities, fracture aperture, and the averaging parameter
// xi in (1/2, 1].  Derived interface quantities:
//   eta     = ell / kappa_n              (jump penalty weight)
//   alpha   = eta * (xi/2 - 1/4)         (average coupling weight)
//   K_gamma = kappa_star * ell           (effective tangential conductivity)

#pragma once

#include <Eigen/Dense>
#include <stdexcept>

namespace fracdg {

struct Coefficients {
  Eigen::Matrix2d K1 = Eigen::Matrix2d::Identity();
  Eigen::Matrix2d K2 = Eigen::Matrix2d::Identity();
  double kappa_n = 1.0;
  double kappa_star = 1.0;
  double ell = 0.01;
  double xi = 0.75;

  double eta() const { return ell / kappa_n; }
  double alpha() const { return eta() * (0.5 * xi - 0.25); }
  double K_gamma() const { return kappa_star * ell; }

  const Eigen::Matrix2d& K(int subdomain) const { return subdomain == 1 ? K1 : K2; }
  Eigen::Matrix2d K_inv(int subdomain) const { return K(subdomain).inverse(); }

  void validate() const {
    auto check_spd = [](const Eigen::Matrix2d& K, const char* name) {
      if (std::abs(K(0, 1) - K(1, 0)) > 1e-14 * K.norm())
        throw std::invalid_argument(std::string("Coefficients: ") + name + " is not symmetric");
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(K);
      if (es.eigenvalues().minCoeff() <= 0.0)
        throw std::invalid_argument(std::string("Coefficients: ") + name + " is not positive definite");
    };
    check_spd(K1, "K1");
    check_spd(K2, "K2");
    if (kappa_n <= 0.0 || kappa_star <= 0.0 || ell <= 0.0)
      throw std::invalid_argument("Coefficients: fracture parameters must be positive");
    if (xi <= 0.5 || xi > 1.0) throw std::invalid_argument("Coefficients: xi must lie in (1/2, 1]");
  }
};

}  // namespace fracdg
