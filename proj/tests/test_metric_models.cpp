#include <doctest.h>

#include <cmath>
#include <numbers>

#include "kahlerlab/errors.hpp"
#include "kahlerlab/metric_models.hpp"

using namespace klab;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("hermitian eigenvalues: known matrices") {
  auto d = HermitianMatrix::diagonal({3.0, -1.0, 2.0});
  auto e = hermitian_eigenvalues(d);
  CHECK(e[0] == doctest::Approx(-1.0));
  CHECK(e[2] == doctest::Approx(3.0));

  HermitianMatrix m(2);
  m.at(0, 0) = 2.0;
  m.at(1, 1) = 2.0;
  m.at(0, 1) = Complex(0, 1);
  m.at(1, 0) = Complex(0, -1);
  auto f = hermitian_eigenvalues(m);  // 2 +- 1
  CHECK(f[0] == doctest::Approx(1.0));
  CHECK(f[1] == doctest::Approx(3.0));
}

TEST_CASE("generalized eigenvalues against a scaled metric") {
  HermitianMatrix b(2);
  b.at(0, 0) = 4.0;
  b.at(1, 1) = 1.0;
  b.at(0, 1) = Complex(1, 0.5);
  b.at(1, 0) = Complex(1, -0.5);
  auto a = b.scaled(2.5);
  auto [lo, hi] = generalized_eigenvalue_extremes(a, b);
  CHECK(lo == doctest::Approx(2.5));
  CHECK(hi == doctest::Approx(2.5));
}

TEST_CASE("conical model samples") {
  ConicalModelMetric m{0.5, 2};
  auto s1 = eval_conical_model(m, {Complex(1, 0), Complex(0.3, 0.2)});
  CHECK(s1.matrix.at(0, 0).real() == doctest::Approx(1.0));
  CHECK(s1.matrix.at(1, 1).real() == doctest::Approx(1.0));

  auto s2 = eval_conical_model(m, {Complex(0.25, 0), Complex(0, 0)});
  CHECK(s2.matrix.at(0, 0).real() == doctest::Approx(4.0));  // |z1|^{-1}

  // beta -> 1 limit: identity
  ConicalModelMetric smooth{1.0, 2};
  auto s3 = eval_conical_model(smooth, {Complex(0.01, 0.02), Complex(1, 1)});
  CHECK(s3.matrix.at(0, 0).real() == doctest::Approx(1.0));

  CHECK_THROWS_AS(eval_conical_model(m, {Complex(0, 0), Complex(1, 0)}),
                  ValidationError);
}

TEST_CASE("conical asymptotic rate is exact at samples") {
  ConicalModelMetric m{0.75, 1};
  for (double r : {0.5, 0.1, 0.02}) {
    auto s = eval_conical_model(m, {Complex(r, 0)});
    double entry = s.matrix.at(0, 0).real();
    CHECK(entry * std::pow(r, 2.0 * (1.0 - m.beta)) == doctest::Approx(1.0));
  }
}

TEST_CASE("fibrewise poincare model: reference values") {
  // |t| = e^{-10}, |z| = e^{-1}: L = -20 + 2 = -18,
  // diagonal e^2/(4 pi), correction e^2/(324 pi)
  FibrewiseModelMetric m{FibrewiseKind::kPoincare, 1,
                         Complex(std::exp(-10.0), 0)};
  auto s = eval_fibrewise_model(m, {Complex(std::exp(-1.0), 0)});
  double diag_expect = std::exp(2.0) / (4 * kPi);
  double corr_expect = std::exp(2.0) / (324 * kPi);
  CHECK(s.matrix.at(0, 0).real() ==
        doctest::Approx(diag_expect + corr_expect).epsilon(1e-12));
}

TEST_CASE("fibrewise conical model: spec sample values") {
  FibrewiseModelMetric spec{FibrewiseKind::kConical, 1,
                            Complex(std::exp(-10.0), 0)};
  auto s = eval_fibrewise_model(spec, {Complex(1.0, 0)});
  // diagonal 1/pi, correction 1/(400 pi): L = -20
  CHECK(s.matrix.at(0, 0).real() ==
        doctest::Approx(1.0 / kPi + 1.0 / (400 * kPi)).epsilon(1e-12));
}

TEST_CASE("fibrewise correction scales as L^{-2} and vanishes as t -> 0") {
  auto corr_coeff = [](double log_t_abs) {
    FibrewiseModelMetric m{FibrewiseKind::kConical, 1,
                           Complex(std::exp(log_t_abs), 0)};
    auto s = eval_fibrewise_model(m, {Complex(1.0, 0)});
    return s.matrix.at(0, 0).real() - 1.0 / kPi;
  };
  double c10 = corr_coeff(-10.0);  // L = -20
  double c20 = corr_coeff(-20.0);  // L = -40: halving 1/L quarters it
  CHECK(c10 / c20 == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("fibrewise model in fiber dimension 2 is hermitian positive") {
  FibrewiseModelMetric m{FibrewiseKind::kPoincare, 2, Complex(0.001, 0.002)};
  auto s = eval_fibrewise_model(
      m, {Complex(0.3, 0.1), Complex(-0.2, 0.4)});
  CHECK(s.matrix.hermitian_defect() < 1e-14);
  CHECK(s.matrix.is_positive_definite());
  auto minors = s.matrix.leading_principal_minors();
  for (double mm : minors) CHECK(mm > 0);
}

TEST_CASE("fibrewise model rejects undefined points") {
  FibrewiseModelMetric m{FibrewiseKind::kPoincare, 1, Complex(0.5, 0)};
  CHECK_THROWS_AS(eval_fibrewise_model(m, {Complex(0, 0)}), ValidationError);
  CHECK_THROWS_AS(eval_fibrewise_model(m, {Complex(1.5, 0)}), ValidationError);
  FibrewiseModelMetric bad{FibrewiseKind::kPoincare, 1, Complex(0, 0)};
  CHECK_THROWS_AS(FibrewiseModelMetric::validated(bad), ValidationError);
  // conical kind, |z| = |t|: L = 0
  FibrewiseModelMetric conic{FibrewiseKind::kConical, 1, Complex(0.5, 0)};
  CHECK_THROWS_AS(eval_fibrewise_model(conic, {Complex(0.5, 0)}),
                  ValidationError);
}

TEST_CASE("quasi-isometry of a model with itself and with a scaled copy") {
  ConicalModelMetric cm{0.5, 1};
  MetricSampler model = [&](const std::vector<Complex>& z) {
    return eval_conical_model(cm, z).matrix;
  };
  SampleRegion region{1, 0.05, 0.8, 6};

  auto same = quasi_isometry_constants(model, model, region);
  CHECK(same.c_low == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(same.c_high == doctest::Approx(1.0).epsilon(1e-12));

  MetricSampler doubled = [&](const std::vector<Complex>& z) {
    return eval_conical_model(cm, z).matrix.scaled(2.0);
  };
  auto twice = quasi_isometry_constants(model, doubled, region);
  CHECK(twice.c_low == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(twice.c_high == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("quasi-isometry rejects a non-positive candidate") {
  ConicalModelMetric cm{0.5, 1};
  MetricSampler model = [&](const std::vector<Complex>& z) {
    return eval_conical_model(cm, z).matrix;
  };
  MetricSampler negated = [&](const std::vector<Complex>& z) {
    return eval_conical_model(cm, z).matrix.scaled(-1.0);
  };
  CHECK_THROWS_AS(quasi_isometry_constants(model, negated, {1, 0.05, 0.8, 4}),
                  SolverError);
}

TEST_CASE("conical model is quasi-isometric to the football near the cone") {
  // candidate: the beta-football's local metric density f(s)/|z|^2 with
  // s = log|z|^2; the ratio against |z|^{2(beta-1)} tends to 2 beta^2
  const double beta = 0.5;
  ConicalModelMetric cm{beta, 1};
  MetricSampler model = [&](const std::vector<Complex>& z) {
    return eval_conical_model(cm, z).matrix;
  };
  MetricSampler football = [&](const std::vector<Complex>& z) {
    double s = std::log(std::norm(z[0]));
    double e = std::exp(beta * s);
    double f = 2.0 * beta * beta * e / ((1.0 + e) * (1.0 + e));
    HermitianMatrix g(1);
    g.at(0, 0) = f / std::norm(z[0]);
    return g;
  };
  auto qi = quasi_isometry_constants(model, football, {1, 1e-4, 0.5, 8});
  // ratio = 2 beta^2 / (1 + e^{beta s})^2 with s = log|z|^2: caps at
  // 2 beta^2 near the cone point and stays bounded below on the region
  CHECK(qi.c_low > 0.2);
  CHECK(qi.c_high <= 2 * beta * beta * 1.0001);
  CHECK(qi.c_high < 1.0);
}
