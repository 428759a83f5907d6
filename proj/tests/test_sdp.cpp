#include "oracles.hpp"

#include "wcrc/error.hpp"
#include "wcrc/sdp.hpp"

#include <doctest.h>

#include <cmath>

using namespace wcrc;

namespace {

void check_feasible(const Eigen::MatrixXd& V, double eps) {
  CHECK((V - V.transpose()).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK(V.diagonal().maxCoeff() <= 1.0 + 1e-8);
  CHECK(oracle::min_eig(V) >= eps - 1e-8);
}

Eigen::MatrixXd random_psd(Index n, std::mt19937_64& rng, Index rank) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd B(n, rank);
  for (Index r = 0; r < n; ++r)
    for (Index c = 0; c < rank; ++c) B(r, c) = g(rng);
  return B * B.transpose() / static_cast<double>(n);
}

}  // namespace

TEST_CASE("solver config validation") {
  SolverConfig cfg;
  cfg.eig_floor = 1.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg.eig_floor = -0.1;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg.eig_floor = 0.0;
  cfg.rel_tol = 0.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("linear solver examples") {
  SUBCASE("identity") {
    for (Index n : {1, 3, 7}) {
      const auto sol = solve_linear(Eigen::MatrixXd::Identity(n, n));
      CHECK(sol.objective == doctest::Approx(static_cast<double>(n)).epsilon(1e-6));
      check_feasible(sol.V, 0.0);
    }
  }
  SUBCASE("rank one") {
    const Eigen::Vector2d c(1, 1);
    const auto sol = solve_linear(c * c.transpose());
    CHECK(sol.objective == doctest::Approx(4.0).epsilon(1e-6));
    CHECK(sol.objective <= oracle::brute_force_max(c * c.transpose()) + sol.residual + 1e-9);
  }
  SUBCASE("inactive floor") {
    SolverConfig cfg;
    cfg.eig_floor = 0.5;
    const auto sol = solve_linear(Eigen::MatrixXd::Identity(2, 2), cfg);
    CHECK(sol.objective == doctest::Approx(2.0).epsilon(1e-6));
    check_feasible(sol.V, 0.5);
  }
  SUBCASE("zero form") {
    CHECK(solve_linear(Eigen::MatrixXd::Zero(4, 4)).objective == doctest::Approx(0.0));
  }
}

TEST_CASE("linear solver certificates on random forms") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = 2 + trial % 9;
    const Eigen::MatrixXd M = random_psd(n, rng, 1 + trial % 3);
    SolverConfig cfg;
    cfg.eig_floor = trial % 2 ? 0.05 : 0.0;
    const auto sol = solve_linear(M, cfg);
    check_feasible(sol.V, cfg.eig_floor);
    CHECK(sol.objective == doctest::Approx((M.cwiseProduct(sol.V)).sum()).epsilon(1e-9));
    CHECK(sol.residual <= cfg.rel_tol * std::max(1.0, std::abs(sol.objective)) + 1e-12);
    // Any feasible point certifies a lower bound on the optimum.
    if (cfg.eig_floor == 0.0) CHECK(oracle::brute_force_max(M) <= sol.upper_bound() + 1e-9);
    for (int k = 0; k < 5; ++k) {
      const Eigen::MatrixXd W = oracle::random_feasible_V(n, rng, cfg.eig_floor);
      CHECK((M.cwiseProduct(W)).sum() <= sol.upper_bound() + 1e-9);
    }
  }
}

TEST_CASE("schur solver examples") {
  SUBCASE("full observation") {
    const auto d = ScenarioDistribution::uniform(4, {{{0, 1, 2}, {0, 1}}, {{1, 2, 3}, {3}}});
    const auto sol = solve_schur(d);
    CHECK(std::abs(sol.objective) <= 1e-6);
  }
  SUBCASE("nothing observed") {
    const auto d = ScenarioDistribution::uniform(1, {{{}, {0}}});
    const auto sol = solve_schur(d);
    CHECK(sol.objective == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(sol.V(0, 0) == doctest::Approx(1.0).epsilon(1e-6));
  }
  SUBCASE("weighted four-element instance") {
    SolverConfig cfg;
    cfg.eig_floor = 1e-4;
    const auto sol = solve_schur(oracle::weighted_four(), cfg);
    CHECK(sol.objective >= 0.6652 - 1e-3);
    CHECK(sol.objective <= oracle::kPi / 2 * 0.6652 + 1e-3);
    check_feasible(sol.V, 1e-4);
  }
}

TEST_CASE("schur objective against the dense oracle") {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = 3 + trial % 6;
    const auto d = oracle::random_distribution(n, 8, rng);
    const Eigen::MatrixXd V = oracle::random_feasible_V(n, rng, trial % 2 ? 0.1 : 0.0);
    const auto ev = schur_objective(d, V);
    CHECK(ev.objective == doctest::Approx(oracle::schur_objective(d, V)).epsilon(1e-8));
    REQUIRE(ev.terms.size() == d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
      CHECK(ev.terms[i] == doctest::Approx(oracle::schur_term(V, d[i].sample(), d[i].target())).epsilon(1e-8));
      CHECK(ev.terms[i] >= -1e-12);
      CHECK(ev.terms[i] <= 1.0 + 1e-12);
    }
  }
}

TEST_CASE("schur gradient is the best-response error form") {
  std::mt19937_64 rng(31);
  const Index n = 6;
  const auto d = oracle::random_distribution(n, 10, rng);
  const Eigen::MatrixXd V = oracle::random_feasible_V(n, rng, 0.2);
  const auto ev = schur_objective(d, V);
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n, n);
  for (const auto& s : d.scenarios()) {
    const Eigen::VectorXd b = s.target_weights().dense();
    const Eigen::VectorXd a = schur_weights(V, s.sample(), b);
    G += s.probability() * (a - b) * (a - b).transpose();
    for (Index j = 0; j < n; ++j)
      if (!s.samples(j)) CHECK(a(j) == 0.0);
  }
  CHECK((ev.gradient - G).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("schur solver: feasibility, certificate and floor perturbation") {
  std::mt19937_64 rng(37);
  for (int trial = 0; trial < 8; ++trial) {
    const Index n = 3 + trial % 4;
    const auto d = oracle::random_distribution(n, 6, rng);
    SolverConfig free_cfg;
    const auto free = solve_schur(d, free_cfg);
    check_feasible(free.V, 0.0);
    SolverConfig floor_cfg;
    floor_cfg.eig_floor = 0.05;
    const auto floored = solve_schur(d, floor_cfg);
    check_feasible(floored.V, 0.05);

    // The floor costs at most eps in objective, and never helps.
    CHECK(floored.objective >= free.objective - 0.05 - free.residual - 1e-9);
    CHECK(floored.objective <= free.upper_bound() + floored.residual + 1e-9);

    // Random feasible points never beat the certified bound.
    for (int k = 0; k < 10; ++k) {
      const Eigen::MatrixXd W = oracle::random_feasible_V(n, rng);
      CHECK(oracle::schur_objective(d, W) <= free.upper_bound() + 1e-9);
    }
    CHECK(free.objective == doctest::Approx(oracle::schur_objective(d, free.V)).epsilon(1e-6));
  }
}

TEST_CASE("schur objective is concave along segments to the optimum") {
  std::mt19937_64 rng(41);
  const Index n = 5;
  const auto d = oracle::random_distribution(n, 7, rng);
  const auto sol = solve_schur(d);
  const double f = schur_objective(d, sol.V).objective;
  for (int k = 0; k < 20; ++k) {
    const Eigen::MatrixXd W = oracle::random_feasible_V(n, rng);
    const double mid = schur_objective(d, 0.5 * (sol.V + W)).objective;
    CHECK(mid >= 0.5 * (f + schur_objective(d, W).objective) - 1e-6);
  }
}

TEST_CASE("pseudoinverse solve") {
  Eigen::Matrix3d S;
  S << 1, 1, 0, 1, 1, 0, 0, 0, 2;
  const Eigen::Vector3d rhs(1, 1, 4);
  const Eigen::VectorXd x = psd_pinv_solve(S, rhs);
  CHECK((S * x - rhs).norm() <= 1e-10);
  // Minimum-norm solution splits the rank-deficient block evenly.
  CHECK(x(0) == doctest::Approx(0.5));
  CHECK(x(1) == doctest::Approx(0.5));
  CHECK(x(2) == doctest::Approx(2.0));
}
