#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "gauss.hpp"
#include "likelihood.hpp"
#include "optim.hpp"
#include "support/fixtures.hpp"

using namespace probitar;

namespace {

// Panel of four single-step paths covering every (lag, outcome) cell once.
PanelData balanced_k1_panel() {
  PanelData panel;
  const int lag[4] = {0, 0, 1, 1};
  const int out[4] = {0, 1, 0, 1};
  for (int c = 0; c < 4; ++c) {
    PathData p;
    p.Y.resize(2, 1);
    p.X.resize(2, 0);
    p.Y(0, 0) = static_cast<std::uint8_t>(lag[c]);
    p.Y(1, 0) = static_cast<std::uint8_t>(out[c]);
    panel.paths.push_back(std::move(p));
  }
  return panel;
}

PanelData sec5_panel(int n, int T, std::uint64_t seed) {
  return simulate_panel(fixtures::sec5_params(), fixtures::sec5_covariates(),
                        n, T, 200, seed);
}

Eigen::VectorXd random_gamma(const GammaDims& dims, Rng& rng, double scale) {
  Eigen::VectorXd g(dims.length());
  for (Eigen::Index i = 0; i < g.size(); ++i)
    g[i] = scale * (2.0 * rng.uniform() - 1.0);
  return g;
}

}  // namespace

TEST_CASE("gamma packing round-trips and orders by columns") {
  ModelParams m = fixtures::sec5_params();
  const Eigen::VectorXd gamma = pack_gamma(m);
  REQUIRE(gamma.size() == 2 * (1 + 2 + 1));
  // [C1 C2 | A(1,1) A(2,1) A(1,2) A(2,2) | B1 B2]
  CHECK(gamma[0] == 0.2);
  CHECK(gamma[1] == 0.4);
  CHECK(gamma[2] == 0.3);
  CHECK(gamma[3] == 0.2);
  CHECK(gamma[4] == -0.5);
  CHECK(gamma[5] == 0.7);
  CHECK(gamma[6] == -0.4);
  CHECK(gamma[7] == 0.6);

  ModelParams back = ModelParams::zeros(2, 1, 1);
  unpack_gamma(gamma, back);
  CHECK(back.A[0] == m.A[0]);
  CHECK(back.B == m.B);
  CHECK(back.C == m.C);

  const GammaDims dims{2, 1, 1};
  for (int eq = 0; eq < 2; ++eq) {
    Eigen::VectorXd scattered = gamma;
    const Eigen::VectorXd row = gather_equation(gamma, dims, eq);
    scatter_equation(row, dims, eq, scattered);
    CHECK(scattered == gamma);
  }
}

TEST_CASE("marginal_pl closed-form values") {
  // all-zero parameters: every term is log(1/2)
  const PanelData panel = sec5_panel(3, 25, 5);
  const GammaDims dims{2, 1, 1};
  const double v = marginal_pl(Eigen::VectorXd::Zero(dims.length()), panel, 1);
  CHECK(v == doctest::Approx(-3.0 * 24 * 2 * std::log(2.0)).epsilon(1e-14));

  // a single observation contributes log Phi(lambda)
  PathData single;
  single.Y.resize(2, 1);
  single.X.resize(2, 0);
  single.Y(0, 0) = 0;
  single.Y(1, 0) = 1;
  Eigen::VectorXd gamma(2);  // C = 0.2, A = 0
  gamma << 0.2, 0.0;
  CHECK(marginal_pl(gamma, as_panel(single), 1) ==
        doctest::Approx(std::log(std_normal_cdf(0.2))).epsilon(1e-14));

  CHECK_THROWS_AS(marginal_pl(gamma, as_panel(single), 2),
                  std::invalid_argument);  // T <= p
}

TEST_CASE("marginal_pl peaks at the truth against random perturbations") {
  const PanelData panel = sec5_panel(20, 100, 91);
  const Eigen::VectorXd truth = pack_gamma(fixtures::sec5_params());
  const double at_truth = marginal_pl(truth, panel, 1);
  Rng rng(13);
  int wins = 0;
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd delta(truth.size());
    for (Eigen::Index i = 0; i < delta.size(); ++i)
      delta[i] = 2.0 * rng.uniform() - 1.0;
    delta *= 0.5 / delta.norm();
    if (at_truth > marginal_pl(truth + delta, panel, 1)) ++wins;
  }
  CHECK(wins >= 18);
}

TEST_CASE("marginal gradient: balanced data zeroes it at gamma = 0") {
  const PanelData panel = balanced_k1_panel();
  const Eigen::VectorXd grad =
      marginal_pl_grad(Eigen::VectorXd::Zero(2), panel, 1);
  CHECK(grad.lpNorm<Eigen::Infinity>() < 1e-14);
}

TEST_CASE("marginal gradient matches finite differences") {
  const PanelData panel = sec5_panel(4, 40, 21);
  const GammaDims dims{2, 1, 1};
  Rng rng(33);
  const double h = 1e-6;
  for (int trial = 0; trial < 8; ++trial) {
    const Eigen::VectorXd gamma = random_gamma(dims, rng, 0.8);
    const Eigen::VectorXd grad = marginal_pl_grad(gamma, panel, 1);
    for (Eigen::Index idx = 0; idx < gamma.size(); ++idx) {
      Eigen::VectorXd up = gamma, dn = gamma;
      up[idx] += h;
      dn[idx] -= h;
      const double fd =
          (marginal_pl(up, panel, 1) - marginal_pl(dn, panel, 1)) / (2.0 * h);
      CHECK(grad[idx] == doctest::Approx(fd).epsilon(1e-6));
    }
  }
}

TEST_CASE("marginal_pl separates across equations") {
  const PanelData panel = sec5_panel(4, 30, 55);
  const GammaDims dims{2, 1, 1};
  Rng rng(3);
  const Eigen::VectorXd gamma = random_gamma(dims, rng, 0.5);

  Eigen::VectorXd bump0 = Eigen::VectorXd::Zero(dims.length());
  Eigen::VectorXd row0 = gather_equation(bump0, dims, 0);
  row0.setConstant(0.3);
  scatter_equation(row0, dims, 0, bump0);
  Eigen::VectorXd bump1 = Eigen::VectorXd::Zero(dims.length());
  Eigen::VectorXd row1 = gather_equation(bump1, dims, 1);
  row1.setConstant(-0.2);
  scatter_equation(row1, dims, 1, bump1);

  // additivity: the effect of bumping row 0 is unchanged by bumping row 1
  const double base = marginal_pl(gamma, panel, 1);
  const double f0 = marginal_pl(gamma + bump0, panel, 1);
  const double f1 = marginal_pl(gamma + bump1, panel, 1);
  const double f01 = marginal_pl(gamma + bump0 + bump1, panel, 1);
  CHECK(f01 - f1 == doctest::Approx(f0 - base).epsilon(1e-12));
}

TEST_CASE("objectives are invariant under path reordering") {
  PanelData panel = sec5_panel(6, 20, 77);
  const GammaDims dims{2, 1, 1};
  Rng rng(8);
  const Eigen::VectorXd gamma = random_gamma(dims, rng, 0.6);
  CorrParam corr = CorrParam::identity(2);
  corr.r[0] = -0.3;

  const double m1 = marginal_pl(gamma, panel, 1);
  const double p1 = pairwise_ll(gamma, corr, 0, 1, panel, 1);
  const double f1 = full_pl(gamma, corr, panel, 1, 500, 4);
  std::reverse(panel.paths.begin(), panel.paths.end());
  CHECK(marginal_pl(gamma, panel, 1) == m1);
  CHECK(pairwise_ll(gamma, corr, 0, 1, panel, 1) == p1);
  CHECK(full_pl(gamma, corr, panel, 1, 500, 4) == f1);
}

TEST_CASE("pairwise_ll factorizes at r = 0") {
  const PanelData panel = sec5_panel(3, 40, 31);
  const GammaDims dims{2, 1, 1};
  Rng rng(17);
  const Eigen::VectorXd gamma = random_gamma(dims, rng, 0.7);
  const CorrParam corr = CorrParam::identity(2);

  // sum of the two marginal blocks; with k = 2 that is the whole marginal
  const double lhs = pairwise_ll(gamma, corr, 0, 1, panel, 1);
  const double rhs = marginal_pl(gamma, panel, 1);
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));

  // gamma = 0, r = 0: -(T-p) * 2 log 2 per path
  const double z =
      pairwise_ll(Eigen::VectorXd::Zero(dims.length()), corr, 0, 1, panel, 1);
  CHECK(z == doctest::Approx(-3.0 * 39 * 2 * std::log(2.0)).epsilon(1e-13));

  CorrParam bad = corr;
  bad.r[0] = 1.0;
  CHECK_THROWS_AS(pairwise_ll(gamma, bad, 0, 1, panel, 1),
                  std::invalid_argument);
}

TEST_CASE("pairwise derivative: symmetric data zeroes it at r = 0") {
  // equal counts of all four outcome patterns, gamma = 0
  PanelData panel;
  for (int si = 0; si < 2; ++si)
    for (int sj = 0; sj < 2; ++sj) {
      PathData p;
      p.Y.resize(2, 2);
      p.X.resize(2, 0);
      p.Y(0, 0) = p.Y(0, 1) = 0;
      p.Y(1, 0) = static_cast<std::uint8_t>(si);
      p.Y(1, 1) = static_cast<std::uint8_t>(sj);
      panel.paths.push_back(std::move(p));
    }
  const GammaDims dims{2, 1, 0};
  const double d = pairwise_ll_dr(Eigen::VectorXd::Zero(dims.length()),
                                  CorrParam::identity(2), 0, 1, panel, 1);
  CHECK(std::abs(d) < 1e-13);
}

TEST_CASE("pairwise derivative matches finite differences") {
  const PanelData panel = sec5_panel(3, 40, 99);
  const GammaDims dims{2, 1, 1};
  Rng rng(23);
  const double h = 1e-5;
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::VectorXd gamma = random_gamma(dims, rng, 0.7);
    CorrParam corr = CorrParam::identity(2);
    corr.r[0] = 1.8 * rng.uniform() - 0.9;
    CorrParam up = corr, dn = corr;
    up.r[0] += h;
    dn.r[0] -= h;
    const double fd = (pairwise_ll(gamma, up, 0, 1, panel, 1) -
                       pairwise_ll(gamma, dn, 0, 1, panel, 1)) /
                      (2.0 * h);
    const double an = pairwise_ll_dr(gamma, corr, 0, 1, panel, 1);
    CHECK(an == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("full_pl degenerate and independence cases") {
  SUBCASE("k = 1 coincides with marginal_pl") {
    ModelParams m = ModelParams::zeros(1, 1, 0);
    m.C[0] = 0.4;
    m.A[0](0, 0) = 0.5;
    const NoCovariates cov;
    const PanelData panel = as_panel(simulate_path(m, cov, 200, 50, 3));
    const Eigen::VectorXd gamma = pack_gamma(m);
    const CorrParam corr = CorrParam::identity(1);
    CHECK(full_pl(gamma, corr, panel, 1, 1000, 7) ==
          marginal_pl(gamma, panel, 1));
  }
  SUBCASE("k = 2 equals the rect2 sum, and R = I reduces to marginal") {
    const PanelData panel = sec5_panel(3, 30, 41);
    const Eigen::VectorXd gamma = pack_gamma(fixtures::sec5_params());
    CorrParam corr = CorrParam::identity(2);
    corr.r[0] = -0.2;
    // explicit rect2 sum oracle
    const DesignMatrix dm = DesignMatrix::build(panel, 1);
    const Eigen::VectorXd l0 = dm.lambda(gather_equation(gamma, dm.dims, 0));
    const Eigen::VectorXd l1 = dm.lambda(gather_equation(gamma, dm.dims, 1));
    double expect = 0.0;
    for (Eigen::Index t = 0; t < dm.rows(); ++t)
      expect += std::log(rect2({l0[t], l1[t], -0.2, dm.y(t, 0), dm.y(t, 1)}));
    CHECK(full_pl(gamma, corr, panel, 1, 1000, 7) ==
          doctest::Approx(expect).epsilon(1e-13));

    const CorrParam id = CorrParam::identity(2);
    CHECK(full_pl(gamma, id, panel, 1, 1000, 7) ==
          doctest::Approx(marginal_pl(gamma, panel, 1)).epsilon(1e-8));
  }
  SUBCASE("k = 3 GHK route is deterministic and negative") {
    ModelParams m = ModelParams::zeros(3, 1, 0);
    m.C << 0.2, -0.1, 0.4;
    m.R << 1.0, 0.3, -0.2, 0.3, 1.0, 0.1, -0.2, 0.1, 1.0;
    const NoCovariates cov;
    const PanelData panel = as_panel(simulate_path(m, cov, 80, 50, 11));
    const Eigen::VectorXd gamma = pack_gamma(m);
    const CorrParam corr = CorrParam::from_matrix(m.R);
    const double a = full_pl(gamma, corr, panel, 1, 800, 99);
    const double b = full_pl(gamma, corr, panel, 1, 800, 99);
    CHECK(a == b);
    CHECK(a < 0.0);
    // close to the exact value computed with many draws
    const double precise = full_pl(gamma, corr, panel, 1, 60'000, 5);
    CHECK(a == doctest::Approx(precise).epsilon(0.01));
  }
}

TEST_CASE("pairwise 1-D maximizer recovers the noise correlation at the truth") {
  // nT >= 5e4 with the generating regression parameters plugged in
  const PanelData panel = sec5_panel(50, 1001, 4242);
  const DesignMatrix dm = DesignMatrix::build(panel, 1);
  const Eigen::VectorXd gamma = pack_gamma(fixtures::sec5_params());
  const PairObjective po = PairObjective::build(dm, gamma, 0, 1);
  const BrentResult best = brent_max(
      [&po](double r) { return po.value(r); }, -0.95, 0.95, 1e-4);
  CHECK(std::abs(best.x - (-0.2)) < 0.05);
}

TEST_CASE("pairwise gamma gradient touches only the pair's equations") {
  // three coordinates: the (0,1) pairwise objective must not react to
  // equation 2's parameters
  ModelParams m = ModelParams::zeros(3, 1, 0);
  m.C << 0.2, -0.1, 0.3;
  m.R << 1.0, 0.3, 0.0, 0.3, 1.0, 0.0, 0.0, 0.0, 1.0;
  const NoCovariates cov;
  const PanelData panel = as_panel(simulate_path(m, cov, 60, 50, 77));
  const GammaDims dims{3, 1, 0};
  Rng rng(5);
  const Eigen::VectorXd gamma = random_gamma(dims, rng, 0.5);
  CorrParam corr = CorrParam::identity(3);
  corr.set_pair(0, 1, 0.25);
  const Eigen::VectorXd grad =
      pairwise_ll_grad_gamma_fd(gamma, corr, 0, 1, panel, 1);
  const Eigen::VectorXd eq2 = gather_equation(grad, dims, 2);
  CHECK(eq2.lpNorm<Eigen::Infinity>() == 0.0);
  const Eigen::VectorXd eq0 = gather_equation(grad, dims, 0);
  CHECK(eq0.lpNorm<Eigen::Infinity>() > 0.0);
}

TEST_CASE("full_pl is a sum of log-probabilities, hence non-positive") {
  const PanelData panel = sec5_panel(3, 25, 12);
  const GammaDims dims{2, 1, 1};
  Rng rng(91);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::VectorXd gamma = random_gamma(dims, rng, 1.5);
    CorrParam corr = CorrParam::identity(2);
    corr.r[0] = 1.9 * rng.uniform() - 0.95;
    CHECK(full_pl(gamma, corr, panel, 1, 300, trial) <= 0.0);
  }
}

TEST_CASE("log clamp keeps hostile regions finite and counts events") {
  const PanelData panel = sec5_panel(2, 20, 1);
  const GammaDims dims{2, 1, 1};
  Eigen::VectorXd gamma = Eigen::VectorXd::Zero(dims.length());
  gamma[0] = 60.0;  // Phi(-60) underflows
  gamma[1] = -60.0;
  LikelihoodDiag diag;
  const double v = marginal_pl(gamma, panel, 1, &diag);
  CHECK(std::isfinite(v));
  CHECK(diag.clamp_events > 0);
}
