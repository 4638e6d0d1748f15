#include "doctest.h"

#include <cmath>
#include <vector>

#include "dsgd/analysis/assumptions.hpp"
#include "dsgd/analysis/convergence.hpp"
#include "dsgd/analysis/lyapunov.hpp"
#include "dsgd/analysis/shared_minimizer.hpp"
#include "dsgd/analysis/smoothness.hpp"
#include "dsgd/core/error.hpp"
#include "support.hpp"

using namespace dsgd;

namespace {

// Linear-regression data whose loss is exactly 1/2 ||w - c||^2: rows sqrt(d) e_j,
// targets sqrt(d) c_j.
Dataset quadratic_client(const ParamVector& c) {
  Dataset d;
  d.feature_dim = c.size();
  d.num_classes = 1;
  const double s = std::sqrt(static_cast<double>(c.size()));
  for (std::size_t j = 0; j < c.size(); ++j) {
    std::vector<double> row(c.size(), 0.0);
    row[j] = s;
    d.push_back(row, 0);
    d.targets.push_back(s * c[j]);
  }
  return d;
}

double half_sq(double x, double c) { return 0.5 * (x - c) * (x - c); }

}  // namespace

TEST_CASE("quadratic client helper") {
  const Model m = Model::linear_regression(3);
  const Dataset d = quadratic_client({1.0, -2.0, 0.5});
  CHECK(loss(m, {1.0, -2.0, 0.5}, Batch::full(d)) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(loss(m, {2.0, -2.0, 0.5}, Batch::full(d)) == doctest::Approx(0.5));
}

TEST_CASE("lyapunov at the optimum is zero") {
  SeededRng rng(1, 1);
  const ParamVector x_star = testing::random_vector(rng, 4);
  const std::vector<ParamVector> xs(3, x_star);
  const std::vector<double> eta{0.1, 5.0, 2.0}, theta{1.0, 0.3, 9.0};
  const ClientObjective f = [&](std::size_t, const ParamVector& x) { return vec_dist(x, x_star); };
  const LyapunovSnapshot s = lyapunov_value({4, &x_star, xs, xs, eta, theta, &x_star}, f, {});
  CHECK(s.value == 0.0);
  CHECK(s.round == 4);
}

TEST_CASE("lyapunov two-client quadratic by hand") {
  // f_1 = 1/2 (x - 1)^2, f_2 = 1/2 (x + 1)^2, x* = 0
  const ClientObjective f = [](std::size_t i, const ParamVector& x) { return half_sq(x[0], i == 0 ? 1.0 : -1.0); };
  const ParamVector x_t{1.0}, x_star{0.0};
  const std::vector<ParamVector> curr{{1.0}, {1.0}}, prev{{0.5}, {2.0}};
  const std::vector<double> eta{0.1, 0.2}, theta{1.0, 2.0};
  const LyapunovSnapshot s = lyapunov_value({1, &x_t, curr, prev, eta, theta, &x_star}, f, {});
  CHECK(s.distance == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(s.pairwise == doctest::Approx((0.25 + 1.0) / 4.0).epsilon(1e-15));
  CHECK(s.suboptimality == doctest::Approx(0.1 * (0.125 - 0.5) + 0.4 * (4.5 - 0.5)).epsilon(1e-15));
  CHECK(s.value == doctest::Approx(2.875).epsilon(1e-15));
}

TEST_CASE("lyapunov value is the sum of its nonnegative parts at a shared minimizer") {
  SeededRng rng(2, 1);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t m = 1 + rng.below(5), d = 1 + rng.below(6);
    const ParamVector x_star = testing::random_vector(rng, d);
    std::vector<double> scale(m);
    for (double& s : scale) s = 0.1 + rng.uniform();
    const ClientObjective f = [&](std::size_t i, const ParamVector& x) {
      return 0.5 * scale[i] * vec_norm_sq(vec_sub(x, x_star));
    };
    std::vector<ParamVector> curr, prev;
    std::vector<double> eta, theta;
    for (std::size_t i = 0; i < m; ++i) {
      curr.push_back(testing::random_vector(rng, d));
      prev.push_back(testing::random_vector(rng, d));
      eta.push_back(rng.uniform());
      theta.push_back(2.0 * rng.uniform());
    }
    const ParamVector x_t = testing::random_vector(rng, d);
    const LyapunovSnapshot s = lyapunov_value({1, &x_t, curr, prev, eta, theta, &x_star}, f, {});
    CHECK(s.distance >= -1e-10);
    CHECK(s.pairwise >= -1e-10);
    CHECK(s.suboptimality >= -1e-10);
    CHECK(s.value == doctest::Approx(s.distance + s.pairwise + s.suboptimality).epsilon(1e-14));
  }
}

TEST_CASE("lyapunov outside its regime") {
  const ParamVector x{0.0};
  const std::vector<ParamVector> xs{{0.0}};
  const std::vector<double> one{1.0};
  const ClientObjective f = [](std::size_t, const ParamVector& v) { return v[0] * v[0]; };
  const LyapunovInputs in{1, &x, xs, xs, one, one, &x};
  CHECK_THROWS_AS((void)lyapunov_value(in, f, {2, 1.0, true}), ConfigError);
  CHECK_THROWS_AS((void)lyapunov_value(in, f, {1, 0.5, true}), ConfigError);
  CHECK_THROWS_AS((void)lyapunov_value(in, f, {1, 1.0, false}), ConfigError);
  const std::vector<double> two{1.0, 1.0};
  CHECK_THROWS_AS((void)lyapunov_value({1, &x, xs, xs, two, one, &x}, f, {}), DimensionError);
}

TEST_CASE("smoothness on quadratics is L") {
  SeededRng rng(3, 1);
  for (double L : {0.5, 1.0, 4.0, 3.7, 100.0}) {
    std::vector<TracePoint> trace;
    for (int k = 0; k < 20; ++k) {
      ParamVector x = testing::random_vector(rng, 5);
      trace.push_back({x, vec_scale(L, x)});
    }
    CHECK(estimate_local_smoothness(trace) == doctest::Approx(L).epsilon(1e-13));
  }
  // powers of two leave no rounding at all
  std::vector<TracePoint> exact{{{1.0, 2.0}, {4.0, 8.0}}, {{3.0, -1.0}, {12.0, -4.0}}};
  CHECK(estimate_local_smoothness(exact) == 4.0);
}

TEST_CASE("smoothness of a linear function is zero") {
  SeededRng rng(4, 1);
  const ParamVector g = testing::random_vector(rng, 3);
  std::vector<TracePoint> trace;
  for (int k = 0; k < 5; ++k) trace.push_back({testing::random_vector(rng, 3), g});
  CHECK(estimate_local_smoothness(trace) == 0.0);
}

TEST_CASE("smoothness of two points is their ratio") {
  const std::vector<TracePoint> trace{{{0.0, 0.0}, {1.0, 1.0}}, {{3.0, 4.0}, {1.0, 3.0}}};
  CHECK(estimate_local_smoothness(trace) == doctest::Approx(2.0 / 5.0).epsilon(1e-15));
  CHECK(smoothness_ratio({0.0}, {1e-13}, {0.0}, {1.0}) == std::nullopt);
}

TEST_CASE("smoothness errors") {
  const std::vector<TracePoint> one{{{1.0}, {1.0}}};
  CHECK_THROWS_AS((void)estimate_local_smoothness(one), ConfigError);
  const std::vector<TracePoint> still{{{1.0}, {1.0}}, {{1.0}, {2.0}}, {{1.0}, {3.0}}};
  CHECK_THROWS_AS((void)estimate_local_smoothness(still), EstimateUnavailable);
}

TEST_CASE("full-batch probes have zero variance") {
  SeededRng rng(5, 1);
  const Model m = Model::softmax_regression(3, 3);
  std::vector<Dataset> clients;
  for (int i = 0; i < 3; ++i) clients.push_back(testing::random_dataset(rng, 8, 3, 3));
  std::vector<ParamVector> probes;
  for (int j = 0; j < 4; ++j) probes.push_back(testing::random_vector(rng, m.param_count()));
  const AssumptionEstimates e = estimate_assumption_constants(m, clients, probes, {8, 4, 1e-8}, SeededRng(1, 1));
  CHECK(e.sigma2_hat == 0.0);
  CHECK(e.g_hat > 0.0);
  CHECK(e.probes == 4);
  const AssumptionEstimates noisy = estimate_assumption_constants(m, clients, probes, {2, 4, 1e-8}, SeededRng(1, 1));
  CHECK(noisy.sigma2_hat > 0.0);
}

TEST_CASE("identical clients have zero dissimilarity") {
  SeededRng rng(6, 1);
  const Model m = Model::mlp(3, 4, 2);
  const Dataset d = testing::random_dataset(rng, 10, 3, 2);
  const std::vector<Dataset> clients{d, d};
  std::vector<ParamVector> probes;
  for (int j = 0; j < 5; ++j) probes.push_back(testing::random_vector(rng, m.param_count()));
  const AssumptionEstimates e = estimate_assumption_constants(m, clients, probes, {}, SeededRng(2, 1));
  REQUIRE(e.rho_hat);
  CHECK(*e.rho_hat == 0.0);
}

TEST_CASE("dissimilarity of two quadratics in closed form") {
  const Model m = Model::linear_regression(2);
  const ParamVector c1{1.0, 0.5}, c2{-1.0, 1.5};
  const std::vector<Dataset> clients{quadratic_client(c1), quadratic_client(c2)};
  const ParamVector cbar{0.0, 1.0};
  SeededRng rng(7, 1);
  for (int trial = 0; trial < 20; ++trial) {
    const ParamVector x = testing::random_vector(rng, 2, 3.0);
    const std::vector<ParamVector> probes{x};
    const AssumptionEstimates e = estimate_assumption_constants(m, clients, probes, {}, SeededRng(3, 1));
    const double expect = vec_norm_sq(vec_sub(cbar, c1)) / vec_norm_sq(vec_sub(x, cbar));
    REQUIRE(e.rho_hat);
    CHECK(*e.rho_hat == doctest::Approx(expect).epsilon(1e-10));
    const double g1 = vec_dist(x, c1), g2 = vec_dist(x, c2);
    CHECK(e.g_hat == doctest::Approx(std::max(g1, g2)).epsilon(1e-12));
  }
  // probe at the mean minimizer: grad f = 0, rho unavailable
  const std::vector<ParamVector> at_mean{cbar};
  const AssumptionEstimates e = estimate_assumption_constants(m, clients, at_mean, {}, SeededRng(3, 1));
  CHECK(!e.rho_hat);
  CHECK(e.rho_probes_skipped == 1);
}

TEST_CASE("adding probes never lowers an estimate") {
  SeededRng rng(8, 1);
  const Model m = Model::softmax_regression(2, 3);
  std::vector<Dataset> clients;
  for (int i = 0; i < 3; ++i) clients.push_back(testing::random_dataset(rng, 12, 2, 3));
  std::vector<ParamVector> probes;
  AssumptionEstimates prev;
  for (int j = 0; j < 15; ++j) {
    probes.push_back(testing::random_vector(rng, m.param_count(), 2.0));
    const AssumptionEstimates e = estimate_assumption_constants(m, clients, probes, {3, 6, 1e-8}, SeededRng(4, 1));
    CHECK(e.sigma2_hat >= prev.sigma2_hat);
    CHECK(e.g_hat >= prev.g_hat);
    if (prev.rho_hat) CHECK(*e.rho_hat >= *prev.rho_hat);
    if (prev.ltilde_hat) CHECK(*e.ltilde_hat >= *prev.ltilde_hat);
    CHECK(e.sigma2_hat >= 0.0);
    prev = e;
  }
  const AssumptionEstimates merged = merge_estimates(prev, AssumptionEstimates{});
  CHECK(merged.g_hat == prev.g_hat);
  CHECK(merged.rho_hat == prev.rho_hat);
}

TEST_CASE("rate constants") {
  AssumptionEstimates e;
  e.sigma2_hat = 8.0;
  e.g_hat = 3.0;
  const RateConstants rc = rate_constants(e, 4, 5.0);
  CHECK(rc.psi2 == 11.0);
  CHECK(rc.psi1 == 5.0);
  CHECK(!rate_constants(e, 1, std::nullopt).psi1);
  CHECK(rate_constants(e, 1, 1.0).psi1 == 8.0);
}

TEST_CASE("convergence slope of a c/sqrt(t) running mean") {
  for (double c : {0.3, 1.0, 40.0}) {
    std::vector<double> g;
    for (int t = 1; t <= 400; ++t) g.push_back(c * (std::sqrt(t) - std::sqrt(t - 1.0)));
    CHECK(convergence_slope(g) == doctest::Approx(-0.5).epsilon(1e-6));
  }
  CHECK(convergence_slope(std::vector<double>(60, 2.5)) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
}

TEST_CASE("convergence slope errors") {
  CHECK_THROWS_AS((void)convergence_slope(std::vector<double>(49, 1.0)), ConfigError);
  std::vector<double> v(60, 1.0);
  v[10] = 0.0;
  CHECK_THROWS_AS((void)convergence_slope(v), ConfigError);
  v[10] = -1.0;
  CHECK_THROWS_AS((void)convergence_slope(v), ConfigError);
}

TEST_CASE("convergence slope uses evaluated records only") {
  std::vector<RoundRecord> recs;
  std::vector<double> g;
  for (int t = 1; t <= 300; ++t) {
    RoundRecord r;
    r.round = static_cast<std::size_t>(t - 1);
    r.evaluated = t % 3 == 0;
    r.grad_norm_sq = r.evaluated ? 1.0 / t : std::nan("");
    if (r.evaluated) g.push_back(r.grad_norm_sq);
    recs.push_back(r);
  }
  CHECK(convergence_slope(recs) == convergence_slope(g));
}

TEST_CASE("running mean and log-log slope") {
  CHECK(running_mean(std::vector<double>{1, 3, 5}) == std::vector<double>{1, 2, 3});
  std::vector<double> power;
  for (int k = 1; k <= 100; ++k) power.push_back(std::pow(k, -1.5));
  CHECK(loglog_slope_second_half(power) == doctest::Approx(-1.5).epsilon(1e-12));
}

TEST_CASE("shared-minimizer problems") {
  SeededRng rng(9, 1);
  const SharedMinimizerProblem p = shared_minimizer_softmax(4, 3, 5, 3, 0.5, rng);
  REQUIRE(p.data.clients.size() == 4);
  for (const Dataset& d : p.data.clients) {
    CHECK(vec_norm(grad(p.model, p.x_star, Batch::full(d))) < 1e-12);
  }
  const SharedMinimizerProblem q = shared_minimizer_linear(3, 4, 10, 0.5, rng);
  for (const Dataset& d : q.data.clients) {
    CHECK(loss(q.model, q.x_star, Batch::full(d)) < 1e-24);
  }
}
