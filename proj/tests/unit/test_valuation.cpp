#include <cmath>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "storval/errors.hpp"
#include "storval/valuation.hpp"

using namespace storval;

namespace {

TrainingOptions iterations(int n) {
  TrainingOptions o;
  o.iterations = n;
  o.seed = 1;
  return o;
}

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::DataError;
}

}  // namespace

TEST_CASE("closed-form price examples") {
  CHECK(indifference_price_exponential(0.0, 0.03) == 0.0);
  CHECK(indifference_price_exponential(10.0, 0.03) == doctest::Approx(-std::log(0.7) / 0.03).epsilon(1e-14));
  CHECK(indifference_price_exponential(10.0, 0.03) == doctest::Approx(11.88916).epsilon(1e-6));
  // Risk-neutral limit.
  CHECK(std::abs(indifference_price_exponential(25.0, 1e-6) / 25.0 - 1.0) < 1e-4);
  CHECK(kind_of([] { indifference_price_exponential(40.0, 0.03); }) == ErrorKind::DomainError);
  CHECK(kind_of([] { indifference_price_from_cost(0.0, 0.03); }) == ErrorKind::DomainError);
}

TEST_CASE("cost form agrees with the utility form") {
  for (double rho : {0.003, 0.03, 0.3}) {
    for (double phi : {0.0, 1.0, 0.5 / rho}) {
      CHECK(indifference_price_from_cost(1.0 / rho - phi, rho) ==
            doctest::Approx(indifference_price_exponential(phi, rho)).epsilon(1e-12));
    }
  }
  // Saturated case: phi indistinguishable from 1/rho in double, cost is not.
  const double rho = 0.3, cost = 1e-30;
  CHECK(indifference_price_from_cost(cost, rho) == doctest::Approx(-std::log(rho * cost) / rho));
}

TEST_CASE("bisection on an affine stub") {
  // value(x) = 2 x + 3; baseline 3 at x0 = 10 gives pi = 10.
  auto value = [](double x) { return 2.0 * x + 3.0; };
  const double tol = 1e-6;
  const auto r = indifference_price_bisection(value, 23.0 - 20.0, {0.0, 64.0}, tol, 10.0);
  CHECK(std::abs(r.price - 10.0) <= tol);
  CHECK(r.iterations == static_cast<int>(std::ceil(std::log2(64.0 / tol))));
  CHECK(r.method == PricingMethod::Bisection);

  // Baseline equal to the value at zero price.
  const auto zero = indifference_price_bisection(value, value(10.0), {0.0, 8.0}, 1e-4, 10.0);
  CHECK(std::abs(zero.price) <= 1e-4);
}

TEST_CASE("bisection argument errors") {
  auto value = [](double x) { return x; };
  CHECK(kind_of([&] { indifference_price_bisection(value, 0.0, {5.0, 8.0}, 1e-3); }) == ErrorKind::BracketInvalid);
  CHECK(kind_of([&] { indifference_price_bisection(value, 0.0, {3.0, 3.0}, 1e-3); }) == ErrorKind::BracketInvalid);
  CHECK(kind_of([&] { indifference_price_bisection(value, 0.0, {0.0, 1e6}, 1e-9, 0.0, 20); }) ==
        ErrorKind::MaxEvaluations);
}

TEST_CASE("wealth shift identity on the toy instance") {
  const auto p = testing::toy_problem();
  const auto chain = testing::toy_chain(p);
  const double rho = p.utility.risk_aversion;
  const double phi0 = bound(train(p, chain, iterations(200)).log);
  for (double x : {-20.0, 15.0}) {
    auto shifted = p;
    shifted.utility.initial_wealth = x;
    const double phi_x = bound(train(shifted, chain, iterations(200)).log);
    const double expected = std::exp(-rho * x) * phi0 + (1.0 - std::exp(-rho * x)) / rho;
    CHECK(phi_x == doctest::Approx(expected).epsilon(1e-8));
  }
}

TEST_CASE("closed form and bisection agree on the toy instance") {
  const auto p = testing::toy_problem();
  const auto chain = testing::toy_chain(p);
  const auto closed = price_exponential(p, chain, iterations(200));
  const auto bis = price_bisection(p, chain, iterations(200), {0.0, 2.0 * closed.price + 1.0}, 1e-4);
  CHECK(closed.method == PricingMethod::ClosedForm);
  CHECK(closed.price > 0.0);
  CHECK(std::abs(closed.price - bis.price) < 1e-3);
  CHECK(closed.phi_without == 0.0);
}

TEST_CASE("sweeps price zero capacity at zero and grow with capacity") {
  const auto base = testing::default_problem();
  SweepSpec spec;
  spec.axis = SweepAxis::Capacity;
  spec.grid = {0.0, 0.5, 1.0, 2.0};
  spec.rhos = {0.003, 0.03};
  spec.quadrature_points = 2;
  spec.iterations = 150;
  const auto rows = price_sweep(base, spec);
  REQUIRE(rows.size() == 8);
  for (std::size_t r = 0; r < 2; ++r) {
    CHECK(rows[r * 4].price_eur == 0.0);
    for (std::size_t k = 1; k < 4; ++k) {
      CHECK(rows[r * 4 + k].rho == spec.rhos[r]);
      CHECK(rows[r * 4 + k].price_eur >= rows[r * 4 + k - 1].price_eur - 1e-3);
    }
  }
  for (const auto& row : rows) CHECK(row.price_eur >= 0.0);

  std::ostringstream csv;
  write_sweep_csv(csv, rows, false);
  const auto text = csv.str();
  CHECK(text.rfind("axis_value,rho,price_eur,bound,train_seconds\n", 0) == 0);
  CHECK(text.find(",0\n") != std::string::npos);

  spec.grid = {1.0, 1.0};
  CHECK_THROWS_AS(price_sweep(base, spec), Error);
}

TEST_CASE("sweep axis names") {
  CHECK(parse_sweep_axis("capacity") == SweepAxis::Capacity);
  CHECK(parse_sweep_axis("alpha") == SweepAxis::SpeedFraction);
  CHECK(parse_sweep_axis("speed_fraction") == SweepAxis::SpeedFraction);
  CHECK(parse_sweep_axis("sigma") == SweepAxis::Sigma);
  CHECK(to_string(SweepAxis::Sigma) == "sigma");
  CHECK(kind_of([] { parse_sweep_axis("volume"); }) == ErrorKind::ConfigError);
}

TEST_CASE("saturation diagnostics are divided second differences") {
  std::vector<SweepRow> rows;
  for (double x : {1.0, 2.0, 4.0}) rows.push_back({x, 0.03, x * x, 0.0, 0.0});
  for (double x : {1.0, 2.0, 3.0}) rows.push_back({x, 0.3, 5.0 * x, 0.0, 0.0});
  const auto d = saturation_diagnostics(rows);
  REQUIRE(d.size() == 2);
  CHECK(d[0].rho == 0.03);
  CHECK(d[0].axis_value == 2.0);
  CHECK(d[0].second_difference == doctest::Approx(2.0));
  CHECK(d[1].second_difference == doctest::Approx(0.0));
}
