// Copyright 2026 The rfood Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <algorithm>
#include <numeric>
#include <random>

#include "doctest.h"
#include "oracles/oracles.hpp"
#include "rfood/error.hpp"
#include "rfood/selection.hpp"
#include "test_util.hpp"

using namespace rfood;

namespace {

FeatureTensor tensor_of(std::vector<std::vector<std::vector<double>>> cube, int label = 0) {
  FeatureTensor t{Tensor3(cube.size(), cube[0].size(), cube[0][0].size()), label};
  for (std::size_t k = 0; k < cube.size(); ++k)
    for (std::size_t i = 0; i < cube[k].size(); ++i)
      for (std::size_t j = 0; j < cube[k][i].size(); ++j) t.values(k, i, j) = cube[k][i][j];
  return t;
}

oracle::Cube cube_of(const FeatureTensor& t) {
  oracle::Cube c(t.channels(), oracle::Grid(t.height(), oracle::Vec(t.width())));
  for (std::size_t k = 0; k < t.channels(); ++k)
    for (std::size_t i = 0; i < t.height(); ++i)
      for (std::size_t j = 0; j < t.width(); ++j) c[k][i][j] = t.values(k, i, j);
  return c;
}

struct Instance {
  std::vector<FeatureTensor> train;
  int n_cls;
};

Instance random_instance(std::mt19937_64& rng) {
  const int n_cls = 2 + static_cast<int>(rng() % 2);
  const std::size_t c = 1 + rng() % 4, h = 1 + rng() % 3, w = h;
  Instance inst{{}, n_cls};
  for (int cls = 0; cls < n_cls; ++cls) {
    const std::size_t n = 1 + rng() % 5;
    for (std::size_t s = 0; s < n; ++s)
      inst.train.push_back(testutil::random_tensor(rng, c, h, w, cls));
  }
  std::shuffle(inst.train.begin(), inst.train.end(), rng);
  return inst;
}

std::vector<std::size_t> argsort(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  return idx;
}

double sum(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0); }

}  // namespace

TEST_CASE("channel_average") {
  CHECK(channel_average(tensor_of({{{1}}, {{3}}})).data() == std::vector<double>{2});
  CHECK(channel_average(FeatureTensor{Tensor3(3, 2, 2), 0}).data() == std::vector<double>(4, 0.0));
  std::mt19937_64 rng(1);
  const auto t = testutil::random_tensor(rng, 3, 2, 2, 0);
  const auto m = channel_average(t);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) {
      double s = 0;
      for (std::size_t k = 0; k < 3; ++k) s += t.values(k, i, j);
      CHECK(m(i, j) == doctest::Approx(s / 3).epsilon(1e-15));
    }
}

TEST_CASE("spatial stats on identical classes") {
  std::mt19937_64 rng(2);
  const auto a = testutil::random_tensor(rng, 3, 2, 2, 0);
  auto b = a;
  b.label = 1;
  const std::vector<FeatureTensor> train{a, b};
  SelectionConfig cfg;
  cfg.sim_mode = SimMode::ScalarLiteral;
  const auto s = compute_spatial_stats(train, cfg);
  for (double v : s.variance.data()) CHECK(v == 0.0);
  for (double v : s.similarity.data()) CHECK(v == doctest::Approx(1.0));
}

TEST_CASE("two-point variance") {
  const std::vector<FeatureTensor> train{tensor_of({{{1}}}, 0), tensor_of({{{3}}}, 1)};
  const auto s = compute_spatial_stats(train, SelectionConfig{});
  CHECK(s.variance(0, 0) == 1.0);
  CHECK(s.class_means[0](0, 0) == 1.0);
  CHECK(s.class_means[1](0, 0) == 3.0);
}

TEST_CASE("fewer than two classes is an error") {
  std::mt19937_64 rng(3);
  const std::vector<FeatureTensor> one{testutil::random_tensor(rng, 2, 2, 2, 0)};
  CHECK_THROWS(compute_spatial_stats(one, SelectionConfig{}));
  CHECK_THROWS(compute_channel_stats(one, SelectionConfig{}));
  const std::vector<FeatureTensor> gap{testutil::random_tensor(rng, 2, 2, 2, 0),
                                       testutil::random_tensor(rng, 2, 2, 2, 2)};
  CHECK_THROWS(compute_spatial_stats(gap, SelectionConfig{}));
  const std::vector<FeatureTensor> ood{testutil::random_tensor(rng, 2, 2, 2, 0),
                                       testutil::random_tensor(rng, 2, 2, 2, -1)};
  CHECK_THROWS_AS(compute_spatial_stats(ood, SelectionConfig{}), ProtocolError);
}

TEST_CASE("shift-normalization") {
  const double eps = 1e-12;
  const auto u = shift_normalize(std::vector<double>(6, 0.3), eps);
  for (double v : u) CHECK(v == doctest::Approx(1.0 / 6).epsilon(1e-12));
  const auto w = shift_normalize(std::vector<double>{1, 3}, eps);
  CHECK(w[0] == doctest::Approx(eps / (2 + 2 * eps)).epsilon(1e-9));
  CHECK(w[1] == doctest::Approx((2 + eps) / (2 + 2 * eps)).epsilon(1e-12));
}

TEST_CASE("spatial weights: degenerate and alpha = 0 cases") {
  SpatialStats equal;
  equal.variance = Matrix(2, 3, 0.5);
  equal.similarity = Matrix(2, 3, 0.2);
  const auto u = compute_spatial_weights(equal, SelectionConfig{});
  for (double v : u.data()) CHECK(v == doctest::Approx(1.0 / 6).epsilon(1e-12));

  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> d(0.0, 1.0);
  SpatialStats s;
  s.variance = Matrix(3, 3);
  s.similarity = Matrix(3, 3);
  for (auto& v : s.variance.data()) v = d(rng);
  for (auto& v : s.similarity.data()) v = 2 * d(rng) - 1;
  SelectionConfig cfg;
  cfg.alpha = 0.0;
  const auto w = compute_spatial_weights(s, cfg);
  CHECK(argsort(w.data()) == argsort(s.variance.data()));
}

TEST_CASE("channel weights: degenerate and beta = 1 cases") {
  ChannelStats equal;
  equal.variance = std::vector<double>(5, 0.1);
  equal.similarity = std::vector<double>(5, 0.4);
  for (double v : compute_channel_weights(equal, SelectionConfig{}))
    CHECK(v == doctest::Approx(0.2).epsilon(1e-12));

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> d(0.0, 1.0);
  ChannelStats s;
  for (int k = 0; k < 6; ++k) {
    s.variance.push_back(d(rng));
    s.similarity.push_back(2 * d(rng) - 1);
  }
  SelectionConfig cfg;
  cfg.beta = 1.0;
  const auto w = compute_channel_weights(s, cfg);
  std::vector<double> neg;
  for (double v : s.similarity) neg.push_back(-v);
  CHECK(argsort(w) == argsort(neg));
}

TEST_CASE("channel stats: single sample map mean") {
  const std::vector<FeatureTensor> train{tensor_of({{{1, 2}, {3, 4}}}, 0),
                                         tensor_of({{{0, 0}, {0, 0}}}, 1)};
  const auto s = compute_channel_stats(train, SelectionConfig{});
  CHECK(s.class_means(0, 0) == 2.5);
  CHECK(s.class_means(1, 0) == 0.0);
}

TEST_CASE("apply_spatial, apply_channel and pool") {
  std::mt19937_64 rng(6);
  const auto t = testutil::random_tensor(rng, 3, 2, 3, 0);

  const auto uni = apply_spatial(t, uniform_spatial_weights(2, 3));
  for (std::size_t i = 0; i < t.values.size(); ++i)
    CHECK(uni.values.data()[i] == doctest::Approx(t.values.data()[i] / 6).epsilon(1e-15));
  Matrix one_hot(2, 3);
  one_hot(1, 2) = 1.0;
  const auto hot = apply_spatial(t, one_hot);
  for (std::size_t k = 0; k < 3; ++k)
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 3; ++j)
        CHECK(hot.values(k, i, j) == (i == 1 && j == 2 ? t.values(k, i, j) : 0.0));
  Matrix w(2, 3);
  for (auto& v : w.data()) v = static_cast<double>(rng() % 100) / 100.0;
  const auto sp = apply_spatial(t, w);
  for (std::size_t k = 0; k < 3; ++k)
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 3; ++j) CHECK(sp.values(k, i, j) == t.values(k, i, j) * w(i, j));
  CHECK_THROWS_AS(apply_spatial(t, Matrix(3, 2)), DimensionError);

  const auto cu = apply_channel(t, uniform_channel_weights(3));
  for (std::size_t i = 0; i < t.values.size(); ++i)
    CHECK(cu.values.data()[i] == doctest::Approx(t.values.data()[i] / 3).epsilon(1e-15));
  const auto ch = apply_channel(t, std::vector<double>{0, 1, 0});
  for (std::size_t k = 0; k < 3; ++k)
    for (double v : ch.values.channel(k))
      if (k != 1) CHECK(v == 0.0);
  const std::vector<double> cw{0.2, 0.5, 0.3};
  const auto cc = apply_channel(t, cw);
  for (std::size_t k = 0; k < 3; ++k)
    for (std::size_t p = 0; p < 6; ++p) CHECK(cc.values.channel(k)[p] == t.values.channel(k)[p] * cw[k]);
  CHECK_THROWS_AS(apply_channel(t, std::vector<double>{1, 0}), DimensionError);

  CHECK(pool(FeatureTensor{Tensor3(4, 3, 3, 1.0), 0}) == std::vector<double>(4, 1.0));
  CHECK(pool(FeatureTensor{Tensor3(4, 3, 3), 0}) == std::vector<double>(4, 0.0));
  const auto g = pool(t);
  for (std::size_t k = 0; k < 3; ++k) {
    double s = 0;
    for (double v : t.values.channel(k)) s += v;
    CHECK(g[k] == doctest::Approx(s / 6).epsilon(1e-15));
  }
}

TEST_CASE("calibrated weights match the direct-formula oracle") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const auto inst = random_instance(rng);
    std::vector<oracle::Sample> data;
    for (const auto& t : inst.train) data.push_back({cube_of(t), t.label});
    for (SimMode mode : {SimMode::ScalarLiteral, SimMode::Profile})
      for (double alpha : {0.0, 0.5, 1.0})
        for (double beta : {0.0, 0.5, 1.0}) {
          SelectionConfig cfg{alpha, beta, mode, 1e-12};
          const auto fit = fit_selection(inst.train, cfg);
          const auto ref = oracle::selection(data, inst.n_cls, alpha, beta,
                                             mode == SimMode::Profile, 1e-12);
          const auto& ws = fit.weights.spatial;
          for (std::size_t i = 0; i < ws.rows(); ++i)
            for (std::size_t j = 0; j < ws.cols(); ++j)
              CHECK(std::abs(ws(i, j) - ref.w_spatial[i][j]) < 1e-9);
          for (std::size_t k = 0; k < fit.weights.channel.size(); ++k)
            CHECK(std::abs(fit.weights.channel[k] - ref.w_channel[k]) < 1e-9);
        }
  }
}

TEST_CASE("weights stay on the simplex and keep the score order") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<FeatureTensor> train;
    for (int cls = 0; cls < 3; ++cls)
      for (int s = 0; s < 4; ++s) train.push_back(testutil::random_tensor(rng, 5, 3, 3, cls));
    for (int a = 0; a <= 10; ++a)
      for (int b = 0; b <= 10; ++b) {
        SelectionConfig cfg{a / 10.0, b / 10.0, trial % 2 ? SimMode::Profile : SimMode::ScalarLiteral, 1e-12};
        const auto spatial = compute_spatial_stats(train, cfg);
        const auto ws = compute_spatial_weights(spatial, cfg);
        CHECK(std::abs(sum(ws.data()) - 1.0) < 1e-9);
        for (double v : ws.data()) CHECK(v >= 0.0);
        std::vector<double> score;
        for (std::size_t i = 0; i < ws.size(); ++i)
          score.push_back((1 - cfg.alpha) * spatial.variance.data()[i] -
                          cfg.alpha * spatial.similarity.data()[i]);
        CHECK(argsort(ws.data()) == argsort(score));

        std::vector<FeatureTensor> weighted;
        for (const auto& t : train) weighted.push_back(apply_spatial(t, ws));
        const auto channel = compute_channel_stats(weighted, cfg);
        const auto wc = compute_channel_weights(channel, cfg);
        CHECK(std::abs(sum(wc) - 1.0) < 1e-9);
        for (double v : wc) CHECK(v >= 0.0);
        std::vector<double> t;
        for (std::size_t k = 0; k < wc.size(); ++k)
          t.push_back((1 - cfg.beta) * channel.variance[k] - cfg.beta * channel.similarity[k]);
        CHECK(argsort(wc) == argsort(t));
        for (double v : spatial.variance.data()) CHECK(v >= 0.0);
        for (double v : spatial.similarity.data()) {
          CHECK(v >= -1.0);
          CHECK(v <= 1.0);
        }
      }
  }
}

TEST_CASE("ablation variants substitute uniform weights") {
  std::mt19937_64 rng(9);
  std::vector<FeatureTensor> train;
  for (int cls = 0; cls < 3; ++cls)
    for (int s = 0; s < 4; ++s) train.push_back(testutil::random_tensor(rng, 4, 3, 3, cls));
  const SelectionConfig cfg;
  const auto full = fit_selection(train, cfg, SelectionVariant::Full);

  const auto sp = fit_selection(train, cfg, SelectionVariant::SpatialOnly);
  CHECK(sp.weights.spatial == full.weights.spatial);
  CHECK(sp.weights.channel == uniform_channel_weights(4));

  const auto ch = fit_selection(train, cfg, SelectionVariant::ChannelOnly);
  CHECK(ch.weights.spatial == uniform_spatial_weights(3, 3));
  // Channel-only equals the channel stage run on uniformly weighted features.
  std::vector<FeatureTensor> uniform;
  for (const auto& t : train) uniform.push_back(apply_spatial(t, uniform_spatial_weights(3, 3)));
  CHECK(ch.weights.channel == compute_channel_weights(compute_channel_stats(uniform, cfg), cfg));

  const auto none = fit_selection(train, cfg, SelectionVariant::None);
  CHECK(none.weights.spatial == uniform_spatial_weights(3, 3));
  CHECK(none.weights.channel == uniform_channel_weights(4));

  // select_and_pool is the composed chain.
  const auto g = select_and_pool(train[0], full.weights);
  const auto ref = pool(apply_channel(apply_spatial(train[0], full.weights.spatial), full.weights.channel));
  CHECK(g == ref);
}

TEST_CASE("permuting channels permutes the channel weights") {
  std::mt19937_64 rng(10);
  std::vector<FeatureTensor> train;
  for (int cls = 0; cls < 2; ++cls)
    for (int s = 0; s < 5; ++s) train.push_back(testutil::random_tensor(rng, 4, 2, 2, cls));
  const std::vector<std::size_t> perm{2, 0, 3, 1};
  std::vector<FeatureTensor> permuted;
  for (const auto& t : train) {
    FeatureTensor p{Tensor3(4, 2, 2), t.label};
    for (std::size_t k = 0; k < 4; ++k)
      for (std::size_t q = 0; q < 4; ++q) p.values.channel(k)[q] = t.values.channel(perm[k])[q];
    permuted.push_back(p);
  }
  for (SimMode mode : {SimMode::ScalarLiteral, SimMode::Profile}) {
    SelectionConfig cfg;
    cfg.sim_mode = mode;
    const auto a = fit_selection(train, cfg), b = fit_selection(permuted, cfg);
    for (std::size_t i = 0; i < 4; ++i)
      CHECK(b.weights.spatial.data()[i] == doctest::Approx(a.weights.spatial.data()[i]).epsilon(1e-12));
    for (std::size_t k = 0; k < 4; ++k)
      CHECK(b.weights.channel[k] == doctest::Approx(a.weights.channel[perm[k]]).epsilon(1e-12));
  }
}

TEST_CASE("cosine guard and names") {
  const std::vector<double> zero{0, 0}, v{1, 2};
  CHECK(cosine_similarity(zero, v, 1e-12) == 0.0);
  CHECK(cosine_similarity(v, v, 1e-12) == doctest::Approx(1.0));
  CHECK(parse_sim_mode("scalar_literal") == SimMode::ScalarLiteral);
  CHECK(parse_selection_variant("channel_only") == SelectionVariant::ChannelOnly);
  CHECK_THROWS(parse_sim_mode("dot"));
  CHECK_THROWS_AS((SelectionConfig{1.5, 0.2, SimMode::Profile, 1e-12}.validate()), ConfigError);
  CHECK_THROWS_AS((SelectionConfig{0.1, 0.2, SimMode::Profile, 0.0}.validate()), ConfigError);
}
