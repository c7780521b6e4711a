#pragma once

#include "model.hpp"

// The two-species simulation design used across the test and acceptance
// suites (one exogenous ARMA(3,1) covariate, negatively correlated noise).
namespace fixtures {

inline probitar::ModelParams sec5_params() {
  probitar::ModelParams m = probitar::ModelParams::zeros(2, 1, 1);
  m.A[0] << 0.3, -0.5, 0.2, 0.7;
  m.B << -0.4, 0.6;
  m.C << 0.2, 0.4;
  m.R << 1.0, -0.2, -0.2, 1.0;
  return m;
}

inline probitar::ArmaCovariates sec5_covariates() {
  return probitar::ArmaCovariates({0.4, -0.2, 0.1}, {0.3}, 1.0, 1);
}

}  // namespace fixtures
