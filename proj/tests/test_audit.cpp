#include "oracles.hpp"

#include "wcrc/audit.hpp"
#include "wcrc/error.hpp"
#include "wcrc/io.hpp"

#include <doctest.h>

#include <cmath>

using namespace wcrc;

namespace {

constexpr double kHalfPi = oracle::kPi / 2;

Eigen::MatrixXd random_psd(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd B(n, n);
  for (Index r = 0; r < n; ++r)
    for (Index c = 0; c < n; ++c) B(r, c) = g(rng);
  return B * B.transpose() / static_cast<double>(n);
}

}  // namespace

TEST_CASE("quadratic form validation") {
  Eigen::Matrix2d asym;
  asym << 1, 0.5, 0, 1;
  CHECK_THROWS_AS(QuadraticFormMatrix{asym}, Error);
  Eigen::Matrix2d indefinite;
  indefinite << 0, 1, 1, 0;
  CHECK_THROWS_AS(QuadraticFormMatrix{indefinite}, Error);
  CHECK_THROWS_AS(QuadraticFormMatrix{Eigen::MatrixXd::Zero(2, 3)}, Error);
}

TEST_CASE("build_M examples") {
  SUBCASE("perfect estimator") {
    std::mt19937_64 rng(2);
    const auto d = oracle::random_distribution(6, 12, rng);
    std::vector<SparseVector> w;
    for (const auto& s : d.scenarios()) w.push_back(s.target_weights());
    CHECK(build_M(w, d).matrix().cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("rank one") {
    const double r = 1.0 / std::sqrt(2.0);
    const ScenarioDistribution d(2, {Scenario({0}, {1}, 1.0, 2)});
    const std::vector<SparseVector> w{SparseVector(2, {{0, r}})};
    const Eigen::Vector2d v(r, -1.0);
    CHECK((build_M(w, d).matrix() - v * v.transpose()).cwiseAbs().maxCoeff() <= 1e-15);

    const Eigen::Vector2d u = Eigen::Vector2d(1, -1) * r;
    const QuadraticFormMatrix Mu(u * u.transpose());
    Eigen::Matrix2d expect;
    expect << 0.5, -0.5, -0.5, 0.5;
    CHECK((Mu.matrix() - expect).cwiseAbs().maxCoeff() <= 1e-15);
  }
  SUBCASE("support is checked against the distribution") {
    const ScenarioDistribution d(2, {Scenario({0}, {1}, 1.0, 2)});
    const SemilinearEstimator est(2, {SparseVector(2, {{1, 1.0}})});
    CHECK_THROWS_AS(build_M(est, d), Error);
  }
}

TEST_CASE("quadratic form equals mse on values") {
  std::mt19937_64 rng(7);
  for (int inst = 0; inst < 10; ++inst) {
    const Index n = 3 + inst % 8;
    const auto d = oracle::random_distribution(n, 15, rng);
    const auto dense = oracle::random_dense_weights(d, rng);
    const auto sparse = oracle::to_sparse(dense);
    const auto M = build_M(sparse, d);
    for (int k = 0; k < 30; ++k) {
      const Eigen::VectorXd x = oracle::random_box(n, rng);
      CHECK(std::abs(M.value(x) - oracle::loop_mse(dense, d, x)) <= 1e-9);
    }
  }
}

TEST_CASE("exact worst case") {
  SUBCASE("identity") {
    const auto ex = exact_worst_case(QuadraticFormMatrix(Eigen::MatrixXd::Identity(2, 2)));
    CHECK(ex.value == 2.0);
    CHECK(ex.witness.cwiseAbs() == Eigen::Vector2d(1, 1));
  }
  SUBCASE("single observation of the wrong element") {
    const ScenarioDistribution d(2, {Scenario({0}, {1}, 1.0, 2)});
    const std::vector<SparseVector> w{SparseVector(2, {{0, 1.0}})};
    CHECK(exact_worst_case(build_M(w, d)).value == doctest::Approx(4.0));
  }
  SUBCASE("matches brute force and its own witness") {
    std::mt19937_64 rng(13);
    for (int k = 0; k < 30; ++k) {
      const Index n = 1 + k % 10;
      const QuadraticFormMatrix M(random_psd(n, rng));
      const auto ex = exact_worst_case(M);
      CHECK(ex.value == doctest::Approx(oracle::brute_force_max(M.matrix())).epsilon(1e-12));
      CHECK(ex.witness.cwiseAbs() == Eigen::VectorXd::Ones(n));
      CHECK(M.value(ex.witness) == ex.value);
    }
  }
  SUBCASE("threshold") {
    const QuadraticFormMatrix M(Eigen::MatrixXd::Identity(23, 23));
    try {
      exact_worst_case(M);
      FAIL("expected threshold error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kThresholdExceeded);
    }
    CHECK(exact_worst_case(M, 23).value == 23.0);
  }
}

TEST_CASE("relaxation bound examples") {
  CHECK(sdp_upper_bound(QuadraticFormMatrix(Eigen::MatrixXd::Zero(3, 3))).upper_bound() ==
        doctest::Approx(0.0));
  const auto id = sdp_upper_bound(QuadraticFormMatrix(Eigen::MatrixXd::Identity(5, 5)));
  CHECK(id.objective == doctest::Approx(5.0).epsilon(1e-6));
  CHECK((id.V - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff() <= 1e-4);

  const Eigen::Vector3d c(1, 1, 1);
  const QuadraticFormMatrix M(c * c.transpose());
  const auto sol = sdp_upper_bound(M);
  CHECK(sol.objective == doctest::Approx(9.0).epsilon(1e-6));
  CHECK(exact_worst_case(M).value == doctest::Approx(9.0));

  // The floor in the config is ignored here.
  SolverConfig cfg;
  cfg.eig_floor = 0.3;
  CHECK(sdp_upper_bound(M, cfg).objective == doctest::Approx(9.0).epsilon(1e-6));
}

TEST_CASE("relaxation is monotone in M") {
  std::mt19937_64 rng(19);
  for (int k = 0; k < 10; ++k) {
    const Index n = 4 + k % 5;
    const Eigen::MatrixXd A = random_psd(n, rng);
    const Eigen::MatrixXd B = random_psd(n, rng) * 0.1;
    const auto a = sdp_upper_bound(QuadraticFormMatrix(A));
    const auto ab = sdp_upper_bound(QuadraticFormMatrix(A + B));
    CHECK(ab.upper_bound() >= a.objective - 1e-9);
  }
}

TEST_CASE("hyperplane rounding") {
  SUBCASE("all-ones V rounds to equal signs") {
    std::mt19937_64 rng(23);
    const QuadraticFormMatrix M(random_psd(4, rng));
    const auto r = round_certificate(Eigen::MatrixXd::Ones(4, 4), M, 1, 200);
    CHECK(r.closed_form == doctest::Approx(M.matrix().sum()).epsilon(1e-9));
    CHECK(r.mc_mean == doctest::Approx(M.matrix().sum()).epsilon(1e-9));
    CHECK(std::abs(r.best_x.sum()) == 4.0);
  }
  SUBCASE("orthogonal vectors keep only the diagonal") {
    const QuadraticFormMatrix M(Eigen::MatrixXd::Identity(2, 2));
    const auto r = round_certificate(Eigen::MatrixXd::Identity(2, 2), M, 1, 50);
    CHECK(r.closed_form == doctest::Approx(2.0));
  }
  SUBCASE("zero columns become coin flips") {
    Eigen::Matrix3d V = Eigen::Matrix3d::Zero();
    V(0, 0) = V(1, 1) = V(0, 1) = V(1, 0) = 1.0;
    Eigen::Matrix3d Mm = Eigen::Matrix3d::Ones();
    const auto r = round_certificate(V, QuadraticFormMatrix(Mm), 3, 20000);
    // Pairs (0,1) agree; index 2 is independent: 4 + 1 = 5 in expectation.
    CHECK(r.closed_form == doctest::Approx(5.0));
    CHECK(std::abs(r.mc_mean - 5.0) <= 4 * r.mc_stderr);
  }
  SUBCASE("monte-carlo mean matches the closed form") {
    std::mt19937_64 rng(27);
    const QuadraticFormMatrix M(random_psd(5, rng));
    const auto sol = sdp_upper_bound(M);
    const auto r = round_certificate(sol.V, M, 5, 100000);
    CHECK(std::abs(r.mc_mean - r.closed_form) <= 3 * r.mc_stderr);
    CHECK(r.closed_form >= 2 / oracle::kPi * sol.objective - 1e-6);
    CHECK(r.best_value <= exact_worst_case(M).value + 1e-12);
  }
  SUBCASE("errors") {
    const QuadraticFormMatrix M(Eigen::MatrixXd::Identity(2, 2));
    Eigen::Matrix2d bad;
    bad << 1, 2, 2, 1;
    CHECK_THROWS_AS(round_certificate(bad, M, 0, 10), Error);
    CHECK_THROWS_AS(round_certificate(Eigen::MatrixXd::Identity(3, 3), M, 0, 10), Error);
    CHECK_THROWS_AS(round_certificate(Eigen::MatrixXd::Identity(2, 2), M, 0, 0), Error);
  }
}

TEST_CASE("audit sandwich on random estimators") {
  std::mt19937_64 rng(43);
  for (int k = 0; k < 15; ++k) {
    const Index n = 2 + k % 9;
    const auto d = oracle::random_distribution(n, 10, rng);
    const SemilinearEstimator est(n, oracle::to_sparse(oracle::random_dense_weights(d, rng)));
    AuditConfig cfg;
    cfg.rng_seed = static_cast<std::uint64_t>(k);
    const auto rep = audit(est, d, cfg);
    REQUIRE(rep.exact_value);
    const double exact = oracle::brute_force_max(build_M(est, d).matrix());
    CHECK(*rep.exact_value == doctest::Approx(exact).epsilon(1e-12));
    CHECK(exact <= rep.sdp_upper + 1e-9);
    CHECK(rep.sdp_upper <= kHalfPi * exact + 1e-5);
    CHECK(rep.rounding_lower >= 2 / oracle::kPi * rep.sdp_upper - 1e-6);
    CHECK(rep.best_rounded <= exact + 1e-12);
    CHECK_NOTHROW(check_report(rep, 1e-6));
  }
}

TEST_CASE("audit of a perfect estimator is zero") {
  const auto cover = ScenarioDistribution::uniform(3, {{{0, 1, 2}, {0}}, {{1, 2}, {1, 2}}});
  std::vector<SparseVector> exact;
  for (const auto& s : cover.scenarios()) exact.push_back(s.target_weights());
  const auto rep = audit(SemilinearEstimator(3, exact), cover);
  CHECK(rep.sdp_upper == doctest::Approx(0.0));
  CHECK(rep.rounding_lower == doctest::Approx(0.0));
  CHECK(*rep.exact_value == 0.0);
}

TEST_CASE("check_report rejects broken sandwiches") {
  AuditReport r;
  r.sdp_upper = 1.0;
  r.rounding_lower = 0.7;
  r.exact_value = 0.5;  // 1.0 > (pi/2) 0.5
  CHECK_THROWS_AS(check_report(r, 1e-6), Error);
  r.exact_value = 0.9;
  CHECK_NOTHROW(check_report(r, 1e-6));
  r.rounding_lower = 0.5;
  CHECK_THROWS_AS(check_report(r, 1e-6), Error);
}

TEST_CASE("audit report JSON") {
  const Eigen::Vector2d c(1, -1);
  const auto rep = audit(QuadraticFormMatrix(c * c.transpose()));
  const Json j = audit_report_to_json(rep);
  CHECK(j.at("sdp_upper").get<double>() == rep.sdp_upper);
  CHECK(j.at("exact_value").get<double>() == doctest::Approx(4.0));
  CHECK(j.at("witness_x").size() == 2);
}
