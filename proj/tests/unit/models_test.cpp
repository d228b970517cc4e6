#include <gtest/gtest.h>

#include <cmath>

#include "cate/dgp.hpp"
#include "cate/errors.hpp"
#include "cate/harness.hpp"
#include "cate/metrics.hpp"
#include "cate/models.hpp"

namespace cate {
namespace {

struct Toy {
  Matrix x;
  std::vector<double> z;
};

Toy toy(std::size_t n, std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  Toy t{Matrix(n, d), std::vector<double>(n)};
  for (double& v : t.x.values()) v = rng.normal();
  for (double& v : t.z) v = rng.bernoulli(0.5) ? 1.0 : 0.0;
  return t;
}

TrainConfig quick(std::size_t epochs, std::uint64_t seed = 1) {
  TrainConfig c;
  c.epochs = epochs;
  c.batch_size = 64;
  c.shuffle_seed = seed;
  return c;
}

bool all_finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

TEST(Architectures, ParameterCountsForFiveCovariates) {
  EXPECT_EQ(count_params(init_network(shared_architecture(5), 0)), 3280u);
  EXPECT_EQ(count_params(init_network(bcf_alpha_architecture(5), 0)) +
                count_params(init_network(bcf_beta_architecture(5), 0)),
            3226u);
  EXPECT_EQ(2 * count_params(init_network(naive_architecture(5), 0)), 3306u);
  const auto p = propensity_architecture(5);
  EXPECT_EQ(p.back().activation, Activation::kSigmoid);
  EXPECT_EQ(p.back().dropout_rate, 0.0);
}

TEST(Architectures, FittedModelsReportTheSameCounts) {
  const Toy t = toy(40, 5, 1);
  const std::vector<double> y(40, 1.0), pi(40, 0.5);
  EXPECT_EQ(count_params(CateModel{fit_shared(t.x, t.z, y, quick(1))}), 3280u);
  EXPECT_EQ(count_params(CateModel{fit_bcf(t.x, t.z, y, pi, quick(1))}), 3226u);
  EXPECT_EQ(count_params(CateModel{fit_naive(t.x, t.z, y, quick(1))}), 3306u);
}

TEST(Methods, NamesRoundTrip) {
  for (Method m : {Method::kShared, Method::kBcf, Method::kNaive, Method::kOls}) {
    EXPECT_EQ(method_from_string(to_string(m)), m);
    EXPECT_EQ(method_from_string(display_name(m)), m);
  }
  EXPECT_THROW(method_from_string("forest"), std::invalid_argument);
}

TEST(Ols, RecoversNoiselessInteractionModelExactly) {
  const Toy t = toy(300, 4, 2);
  const std::vector<double> delta{1.0, -0.5, 0.25, 2.0};
  const std::vector<double> gamma{0.3, 0.0, -1.2, 0.7};
  std::vector<double> y(300);
  for (std::size_t i = 0; i < 300; ++i) {
    y[i] = 1.5 + 2.0 * t.z[i];
    for (std::size_t j = 0; j < 4; ++j) y[i] += t.x(i, j) * (delta[j] + t.z[i] * gamma[j]);
  }
  const OlsModel m = fit_ols(t.x, t.z, y);
  EXPECT_NEAR(m.intercept, 1.5, 1e-8);
  EXPECT_NEAR(m.beta_z, 2.0, 1e-8);
  for (std::size_t j = 0; j < 4; ++j) {
    EXPECT_NEAR(m.delta[j], delta[j], 1e-8);
    EXPECT_NEAR(m.gamma[j], gamma[j], 1e-8);
  }
  EXPECT_FALSE(m.rank_deficient);
}

TEST(Ols, ConstantEffectPlusOneCovariate) {
  const Toy t = toy(100, 5, 3);
  std::vector<double> y(100);
  for (std::size_t i = 0; i < 100; ++i) y[i] = 2.0 * t.z[i] + t.x(i, 0);
  const OlsModel m = fit_ols(t.x, t.z, y);
  EXPECT_NEAR(m.beta_z, 2.0, 1e-8);
  EXPECT_NEAR(m.delta[0], 1.0, 1e-8);
  for (std::size_t j = 1; j < 5; ++j) EXPECT_NEAR(m.delta[j], 0.0, 1e-8);
  for (double g : m.gamma) EXPECT_NEAR(g, 0.0, 1e-8);
}

TEST(Ols, RankDeficientDesignIsFlagged) {
  Toy t = toy(50, 2, 4);
  for (std::size_t i = 0; i < 50; ++i) t.x(i, 1) = 2.0 * t.x(i, 0);
  std::vector<double> y(50);
  for (std::size_t i = 0; i < 50; ++i) y[i] = t.z[i] + t.x(i, 0);
  const OlsModel m = fit_ols(t.x, t.z, y);
  EXPECT_TRUE(m.rank_deficient);
  const auto fitted = predict_prognostic(CateModel{m}, t.x);
  for (std::size_t i = 0; i < 50; ++i) {
    EXPECT_NEAR(fitted[i] + t.z[i] * predict_cate(CateModel{m}, t.x)[i], y[i], 1e-8);
  }
}

TEST(Ols, PredictionFormulas) {
  OlsModel m;
  m.intercept = 0.7;
  m.beta_z = 1.0;
  m.delta = {0.1, 0.2, 0.3, 0.4, 0.5};
  m.gamma = {0.5, 0, 0, 0, 0};
  const Matrix x{{2, 9, 9, 9, 9}};
  EXPECT_DOUBLE_EQ(predict_cate(CateModel{m}, x)[0], 2.0);
  EXPECT_DOUBLE_EQ(predict_prognostic(CateModel{m}, Matrix(1, 5, 0.0))[0], 0.7);
}

TEST(Shared, ZeroEffectHeadGivesBiasEverywhere) {
  const Toy t = toy(30, 5, 5);
  SharedNet s = fit_shared(t.x, t.z, std::vector<double>(30, 0.0), quick(1));
  Layer& last = s.net.layers.back();
  for (std::size_t r = 0; r < last.weights.rows(); ++r) last.weights(r, 1) = 0.0;
  last.bias(0, 1) = 0.37;
  for (double b : predict_cate(CateModel{s}, t.x)) EXPECT_DOUBLE_EQ(b, 0.37);
}

TEST(Shared, RecoversConstantEffect) {
  // Default dropout needs a few thousand updates to settle the output level.
  const Toy t = toy(2000, 5, 6);
  std::vector<double> y(2000);
  for (std::size_t i = 0; i < 2000; ++i) y[i] = 1.0 + 2.0 * t.z[i];
  const SharedNet s = fit_shared(t.x, t.z, y, quick(250));
  EXPECT_NEAR(mean(predict_cate(CateModel{s}, t.x)), 2.0, 0.1);
}

// With z = 0 everywhere the effect output never receives gradient, so its
// head (shared net) or whole network (bcf) keeps its initial weights.
TEST(Shared, AllControlLeavesEffectHeadAtInit) {
  const Toy t = toy(80, 5, 7);
  const std::vector<double> z(80, 0.0);
  std::vector<double> y(80);
  for (std::size_t i = 0; i < 80; ++i) y[i] = t.x(i, 0);
  const SharedNet a = fit_shared(t.x, z, y, quick(1));
  const SharedNet b = fit_shared(t.x, z, y, quick(4));
  EXPECT_TRUE(b.diagnostics.degenerate_treatment);
  const Layer& la = a.net.layers.back();
  const Layer& lb = b.net.layers.back();
  for (std::size_t r = 0; r < la.weights.rows(); ++r) {
    EXPECT_EQ(la.weights(r, 1), lb.weights(r, 1));
  }
  EXPECT_EQ(la.bias(0, 1), lb.bias(0, 1));
  EXPECT_NE(la.weights(0, 0), lb.weights(0, 0));
}

TEST(Bcf, AllControlLeavesEffectNetworkAtInit) {
  const Toy t = toy(80, 5, 8);
  const std::vector<double> z(80, 0.0), pi(80, 0.4);
  std::vector<double> y(80);
  for (std::size_t i = 0; i < 80; ++i) y[i] = t.x(i, 1);
  const BcfNet a = fit_bcf(t.x, z, y, pi, quick(1));
  const BcfNet b = fit_bcf(t.x, z, y, pi, quick(4));
  EXPECT_EQ(a.beta_net, b.beta_net);
  EXPECT_NE(a.alpha_net, b.alpha_net);
}

TEST(Bcf, ConstantOutcomePrognosis) {
  const Toy t = toy(2000, 5, 9);
  const std::vector<double> z(2000, 0.0), y(2000, 5.0), pi(2000, 0.5);
  const BcfNet m = fit_bcf(t.x, z, y, pi, quick(250));
  EXPECT_NEAR(mean(predict_prognostic(CateModel{m}, t.x, std::span<const double>(pi))), 5.0,
              0.1);
}

TEST(Bcf, PropensityInputIsRequiredForPrognosis) {
  const Toy t = toy(30, 5, 10);
  const std::vector<double> y(30, 1.0), pi(30, 0.5);
  const BcfNet m = fit_bcf(t.x, t.z, y, pi, quick(1));
  EXPECT_THROW(predict_prognostic(CateModel{m}, t.x), std::invalid_argument);
  EXPECT_NO_THROW(predict_cate(CateModel{m}, t.x));
  std::vector<double> bad = pi;
  bad[3] = 1.0;
  EXPECT_THROW(fit_bcf(t.x, t.z, y, bad, quick(1)), std::invalid_argument);
}

TEST(Naive, EqualArmsGiveZeroEffect) {
  const Toy t = toy(400, 5, 11);
  const std::vector<double> y(400, 1.0);
  const NaiveNets m = fit_naive(t.x, t.z, y, quick(250));
  EXPECT_LT(std::abs(mean(predict_cate(CateModel{m}, t.x))), 0.05);
}

TEST(Naive, EffectIsDifferenceOfArmPredictions) {
  const Toy t = toy(60, 5, 12);
  std::vector<double> y(60);
  for (std::size_t i = 0; i < 60; ++i) y[i] = t.x(i, 2) + t.z[i];
  const NaiveNets m = fit_naive(t.x, t.z, y, quick(3));
  const auto cate = predict_cate(CateModel{m}, t.x);
  const Matrix y1 = predict(m.y1_net, t.x), y0 = predict(m.y0_net, t.x);
  for (std::size_t i = 0; i < 60; ++i) EXPECT_EQ(cate[i], y1(i, 0) - y0(i, 0));
  EXPECT_EQ(predict_prognostic(CateModel{m}, t.x)[5], y0(5, 0));
}

TEST(Naive, NeedsBothArms) {
  const Toy t = toy(20, 5, 13);
  EXPECT_THROW(fit_naive(t.x, std::vector<double>(20, 1.0), std::vector<double>(20, 0.0),
                         quick(1)),
               std::invalid_argument);
}

TEST(Models, TreatmentMustBeBinary) {
  const Toy t = toy(10, 2, 14);
  std::vector<double> z = t.z;
  z[0] = 0.5;
  EXPECT_THROW(fit_ols(t.x, z, std::vector<double>(10, 0.0)), std::invalid_argument);
  EXPECT_THROW(fit_shared(t.x, z, std::vector<double>(10, 0.0), quick(1)),
               std::invalid_argument);
}

TEST(Models, EveryVariantGivesFiniteEffectsOnTestSample) {
  const DgpSample s = sample_dgp({300, Regime::kSmallTreatment, 1.0, 15});
  const TestSample test = make_test_sample(10000, Regime::kSmallTreatment, 16);
  Hyperparams h;
  h.epochs = 3;
  h.propensity_epochs = 3;
  for (Method m : {Method::kShared, Method::kBcf, Method::kNaive, Method::kOls}) {
    const CateModel model = fit_method(m, s.x, s.z, s.y, 17, h);
    const auto b = predict_cate(model, test.x);
    EXPECT_EQ(b.size(), 10000u);
    EXPECT_TRUE(all_finite(b)) << to_string(m);
    EXPECT_TRUE(all_finite(predict_prognostic(model, test.x))) << to_string(m);
    EXPECT_THROW(predict_cate(model, Matrix(3, 4)), ShapeError);
  }
}

TEST(Models, PrognosisOnSimulationIsNearPopulationMean) {
  const DgpSample s = sample_dgp({1000, Regime::kSmallTreatment, 1.0, 18});
  const TestSample test = make_test_sample(10000, Regime::kSmallTreatment, 19);
  const SharedNet m = fit_shared(s.x, s.z, s.y, quick(250));
  EXPECT_NEAR(mean(predict_prognostic(CateModel{m}, test.x)), 1.95, 0.3);
}

TEST(Propensity, BalancedRandomAssignment) {
  const Toy t = toy(2000, 5, 20);
  const PropensityModel m = fit_propensity(t.x, t.z, quick(100));
  const double avg = mean(predict_propensity(m, t.x));
  EXPECT_GE(avg, 0.45);
  EXPECT_LE(avg, 0.55);
}

TEST(Propensity, SeparableDataStaysInsideUnitInterval) {
  Matrix x(200, 1);
  std::vector<double> z(200);
  for (std::size_t i = 0; i < 200; ++i) {
    x(i, 0) = (i < 100 ? -3.0 : 3.0) + 0.01 * static_cast<double>(i % 7);
    z[i] = i < 100 ? 0.0 : 1.0;
  }
  const PropensityModel m = fit_propensity(x, z, quick(250));
  const Matrix extreme{{-1e6}, {1e6}, {0.0}};
  for (const Matrix* q : std::initializer_list<const Matrix*>{&x, &extreme}) {
    for (double p : predict_propensity(m, *q)) {
      EXPECT_GT(p, 0.0);
      EXPECT_LT(p, 1.0);
    }
  }
}

TEST(Propensity, TracksTrueSelectionProbability) {
  const DgpSample s = sample_dgp({10000, Regime::kSmallTreatment, 1.0, 21});
  const PropensityModel m = fit_propensity(s.x, s.z, quick(250));
  EXPECT_GT(pearson_corr(predict_propensity(m, s.x), s.pi), 0.8);
  EXPECT_NEAR(mean(predict_propensity(m, s.x)), 0.37, 0.05);
}

TEST(Propensity, NeedsBothClasses) {
  const Toy t = toy(20, 2, 22);
  EXPECT_THROW(fit_propensity(t.x, std::vector<double>(20, 0.0), quick(1)),
               std::invalid_argument);
}

}  // namespace
}  // namespace cate
