#include <stdexcept>

#include <fmt/format.h>

#include "sigssar/estimators.hpp"

namespace sigssar::est {

double rho_hat(const Fit& fit) {
  return std::visit([](const auto& f) { return f.rho_hat; }, fit);
}

std::size_t order(const Fit& fit) {
  return std::visit([](const auto& f) { return f.order; }, fit);
}

Eigen::VectorXd mean_component(const Fit& fit, const Eigen::MatrixXd& xi) {
  struct Visitor {
    const Eigen::MatrixXd& xi;
    Eigen::VectorXd operator()(const RidgeFit& f) const {
      if (xi.cols() != f.beta_hat.size()) {
        throw std::invalid_argument(fmt::format("ridge fit expects {} design columns, got {}",
                                                f.beta_hat.size(), xi.cols()));
      }
      return (xi * f.beta_hat).array() + f.alpha_hat;
    }
    Eigen::VectorXd operator()(const ProjFit& f) const {
      const Eigen::MatrixXd scores = std::visit([&](const auto& b) { return project(b, xi); }, f.basis);
      return (scores * f.phi_hat).array() + f.alpha_hat;
    }
  };
  return std::visit(Visitor{xi}, fit);
}

Eigen::VectorXd predict(const Fit& fit, const WeightMatrix& w_full, const Eigen::MatrixXd& xi_full) {
  if (w_full.size() != xi_full.rows()) {
    throw std::invalid_argument(fmt::format("predict: W has {} sites, design has {} rows",
                                            w_full.size(), xi_full.rows()));
  }
  return spatial::solve_reduced_form(w_full, rho_hat(fit), mean_component(fit, xi_full));
}

}  // namespace sigssar::est
