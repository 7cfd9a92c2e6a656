// Copyright 2026 The rfood Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <cmath>
#include <random>
#include <set>

#include "doctest.h"
#include "oracles/oracles.hpp"
#include "rfood/binary_io.hpp"
#include "rfood/error.hpp"
#include "rfood/scoring.hpp"
#include "test_util.hpp"

using namespace rfood;

namespace {

LinearHead random_head(std::mt19937_64& rng, std::size_t classes, std::size_t inputs) {
  std::normal_distribution<double> g(0.0, 1.0);
  LinearHead h{Matrix(classes, inputs), std::vector<double>(classes)};
  for (auto& v : h.weights.data()) v = g(rng);
  for (auto& v : h.bias) v = g(rng);
  return h;
}

// Train/val sets whose classes differ in which channels are active.
std::pair<std::vector<FeatureTensor>, std::vector<FeatureTensor>> toy_sets(std::mt19937_64& rng) {
  std::vector<FeatureTensor> train, val;
  for (int cls = 0; cls < 3; ++cls)
    for (int s = 0; s < 12; ++s) {
      auto t = testutil::random_tensor(rng, 4, 3, 3, cls);
      for (std::size_t q = 0; q < 9; ++q) t.values.channel(static_cast<std::size_t>(cls))[q] += 2.0;
      (s < 8 ? train : val).push_back(t);
    }
  return {train, val};
}

}  // namespace

TEST_CASE("energy score") {
  CHECK(energy_score(std::vector<double>{0, 0}) == doctest::Approx(0.693147).epsilon(1e-6));
  CHECK(energy_score(std::vector<double>{4.25}) == 4.25);
  const long double direct = std::log(std::exp(1.0L) + std::exp(2.0L) + std::exp(3.0L));
  CHECK(std::abs(energy_score(std::vector<double>{1, 2, 3}) - static_cast<double>(direct)) < 1e-12);
  CHECK(energy_score(std::vector<double>{1, 2, 3}) == doctest::Approx(3.407606).epsilon(1e-6));
  CHECK(std::isfinite(energy_score(std::vector<double>{1000, 999})));
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0.0, 5.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> z(5);
    for (auto& v : z) v = g(rng);
    const double c = g(rng);
    auto shifted = z;
    for (auto& v : shifted) v += c;
    CHECK(std::abs(energy_score(shifted) - (energy_score(z) + c)) < 1e-9);
  }
}

TEST_CASE("max softmax score") {
  CHECK(max_softmax_score(std::vector<double>{0, 0}) == 0.5);
  CHECK(max_softmax_score(std::vector<double>{-3.0}) == 1.0);
  const double e1 = std::exp(1.0), e2 = std::exp(2.0), e3 = std::exp(3.0);
  CHECK(max_softmax_score(std::vector<double>{1, 2, 3}) == doctest::Approx(e3 / (e1 + e2 + e3)).epsilon(1e-14));
  CHECK(max_softmax_score(std::vector<double>{1, 2, 3}) == doctest::Approx(0.665241).epsilon(1e-6));
}

TEST_CASE("gradient norm examples") {
  LinearHead id{Matrix(2, 2, std::vector<double>{1, 0, 0, 1}), {0, 0}};
  CHECK(gradient_norm(id, std::vector<double>{3, 1}, GradMode::MaxLogitLiteral) == 1.0);
  LinearHead h{Matrix(2, 2, std::vector<double>{3, 4, 0, 0}), {0, 0}};
  CHECK(gradient_norm(h, std::vector<double>{1, 1}, GradMode::MaxLogitLiteral) == 5.0);
  CHECK_THROWS_AS(gradient_norm(h, std::vector<double>{1}, GradMode::MaxLogitLiteral), DimensionError);
  // Ties resolve to the first class.
  LinearHead tie{Matrix(2, 2, std::vector<double>{1, 0, 0, 2}), {0, 0}};
  CHECK(gradient_norm(tie, std::vector<double>{2, 1}, GradMode::MaxLogitLiteral) == 1.0);
}

TEST_CASE("gradient norms match central differences") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g(0.0, 1.0);
  int checked = 0;
  while (checked < 50) {
    const auto head = random_head(rng, 2 + rng() % 4, 1 + rng() % 6);
    oracle::Vec x(head.inputs());
    for (auto& v : x) v = g(rng);
    auto z = logits(head, x);
    std::sort(z.begin(), z.end());
    if (z[z.size() - 1] - z[z.size() - 2] < 1e-3) continue;
    const auto max_logit = [&](const oracle::Vec& p) {
      const auto zz = logits(head, p);
      return *std::max_element(zz.begin(), zz.end());
    };
    const double fd = oracle::norm(oracle::central_difference(max_logit, x, 1e-6));
    const double an = gradient_norm(head, x, GradMode::MaxLogitLiteral);
    CHECK(std::abs(an - fd) / fd < 1e-6);

    const auto energy = [&](const oracle::Vec& p) { return energy_score(logits(head, p)); };
    const double fd_e = oracle::norm(oracle::central_difference(energy, x, 1e-5));
    CHECK(std::abs(gradient_norm(head, x, GradMode::EnergyGrad) - fd_e) / fd_e < 1e-6);
    ++checked;
  }
}

TEST_CASE("literal gradient norm depends only on the winning class") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 1.0);
  const auto head = random_head(rng, 4, 6);
  std::map<std::size_t, double> by_class;
  std::set<double> distinct;
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> x(6);
    for (auto& v : x) v = g(rng);
    const double v = gradient_norm(head, x, GradMode::MaxLogitLiteral);
    const auto k = argmax(logits(head, x));
    if (by_class.count(k)) CHECK(by_class[k] == v);
    by_class[k] = v;
    distinct.insert(v);
  }
  CHECK(distinct.size() <= 4);
}

TEST_CASE("normalizer fitting") {
  const std::vector<ScorePair> two{{1.0, 5.0}, {3.0, 5.0}};
  const auto n = fit_normalizer(two);
  CHECK(n.mu_energy == 2.0);
  CHECK(n.sigma_energy == 1.0);
  CHECK(n.sigma_grad == ScoreNormalizer::kSigmaFloor);
  CHECK(n.grad_z(5.0) == 0.0);
  CHECK_THROWS(fit_normalizer(std::vector<ScorePair>{}));
  CHECK_THROWS(fit_normalizer(std::vector<ScorePair>{{1.0, 1.0}}));

  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(3.0, 2.0);
  std::vector<ScorePair> s(37);
  for (auto& p : s) p = {g(rng), g(rng)};
  const auto f = fit_normalizer(s);
  oracle::Vec e, gr;
  for (auto& p : s) {
    e.push_back(p.energy);
    gr.push_back(p.grad);
  }
  double me = 0;
  for (double v : e) me += v;
  me /= 37;
  CHECK(f.mu_energy == doctest::Approx(me).epsilon(1e-14));
  CHECK(f.sigma_energy == doctest::Approx(std::sqrt(oracle::pop_variance(e))).epsilon(1e-12));
  CHECK(f.sigma_grad == doctest::Approx(std::sqrt(oracle::pop_variance(gr))).epsilon(1e-12));
}

TEST_CASE("fused score") {
  ScoreNormalizer n;  // identity normalization
  FusionConfig f;
  f.lambda = 1.0;
  CHECK(fused_score(0.7, 9.0, n, f) == 0.7);
  f.lambda = 0.0;
  CHECK(fused_score(0.7, 9.0, n, f) == -9.0);
  f.lambda = 0.2;
  CHECK(fused_score(1.0, 0.5, n, f) == doctest::Approx(-0.2).epsilon(1e-15));
  // Monotone in each component.
  n = ScoreNormalizer{0.3, 2.0, -1.0, 0.5};
  for (double lam : {0.1, 0.5, 0.9}) {
    f.lambda = lam;
    for (double s = -3; s < 3; s += 0.5) {
      CHECK(fused_score(s + 0.1, 1.0, n, f) > fused_score(s, 1.0, n, f));
      CHECK(fused_score(1.0, s + 0.1, n, f) < fused_score(1.0, s, n, f));
    }
  }
  CHECK_THROWS_AS((FusionConfig{1.5, GradMode::MaxLogitLiteral}.validate()), ConfigError);
}

TEST_CASE("threshold calibration") {
  CHECK(calibrate_threshold(std::vector<double>(20, 1.25), 0.95) == 1.25);
  std::vector<double> s;
  for (int i = 1; i <= 100; ++i) s.push_back(i);
  const double gamma = calibrate_threshold(s, 0.95);
  CHECK(gamma == doctest::Approx(5.95));
  int above = 0;
  for (double v : s) above += v >= gamma;
  CHECK(above == 95);
  CHECK_THROWS(calibrate_threshold(s, 1.0));
  CHECK_THROWS(calibrate_threshold(s, 0.0));
  CHECK_THROWS(calibrate_threshold(std::vector<double>{}, 0.9));

  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> v(1 + rng() % 60);
    for (auto& x : v) x = std::round(g(rng) * 4) / 4;  // ties on purpose
    const double r = std::uniform_real_distribution<double>(0.05, 0.99)(rng);
    const double gm = calibrate_threshold(v, r);
    std::size_t kept = 0;
    for (double x : v) kept += x >= gm;
    CHECK(static_cast<double>(kept) >= r * static_cast<double>(v.size()) - 1e-9);
  }
}

TEST_CASE("decision flips at gamma") {
  CHECK(decide(1.5, 1.5) == Decision::ID);
  CHECK(decide(1.5 - 1e-9, 1.5) == Decision::OOD);
  CHECK(decide(1.5 + 1e-9, 1.5) == Decision::ID);
  CHECK(to_string(Decision::OOD) == "OOD");
}

TEST_CASE("calibrated scoring equals the hand-composed chain") {
  std::mt19937_64 rng(6);
  const auto [train, val] = toy_sets(rng);
  CalibrationConfig cfg;
  const auto cal = calibrate(train, val, cfg);
  const auto& a = cal.artifact;
  CHECK(cal.train_accuracy == 1.0);
  for (const auto& t : val) {
    const auto g = pool(apply_channel(apply_spatial(t, a.weights.spatial), a.weights.channel));
    const auto z = logits(a.head, g);
    const double e = energy_score(z);
    const double gn = gradient_norm(a.head, g, GradMode::MaxLogitLiteral);
    const double fused = 0.2 * (e - a.normalizer.mu_energy) / a.normalizer.sigma_energy -
                         0.8 * (gn - a.normalizer.mu_grad) / a.normalizer.sigma_grad;
    const auto r = score_sample(a, t);
    CHECK(r.s_energy == e);
    CHECK(r.g_norm == gn);
    CHECK(r.s_fused == doctest::Approx(fused).epsilon(1e-12));
    CHECK(r.predicted_class == argmax(z));
    CHECK(r.decision == (r.s_fused >= a.gamma ? Decision::ID : Decision::OOD));
  }
  // Validation retention holds for the fitted threshold.
  std::size_t kept = 0;
  for (const auto& t : val) kept += score_sample(a, t).decision == Decision::ID;
  CHECK(static_cast<double>(kept) >= 0.95 * static_cast<double>(val.size()));

  auto bad = val[0];
  bad.values = Tensor3(5, 3, 3);
  CHECK_THROWS_AS(score_sample(a, bad), DimensionError);
  CHECK_THROWS(score_sample(CalibrationArtifact{}, val[0]));
}

TEST_CASE("max-softmax mode thresholds the softmax confidence") {
  std::mt19937_64 rng(7);
  const auto [train, val] = toy_sets(rng);
  CalibrationConfig cfg;
  cfg.variant = SelectionVariant::None;
  cfg.score_mode = ScoreMode::MaxSoftmax;
  const auto a = calibrate(train, val, cfg).artifact;
  for (const auto& t : val) {
    const auto r = score_sample(a, t);
    const auto z = logits(a.head, select_and_pool(t, a.weights));
    CHECK(r.s_fused == max_softmax_score(z));
  }
}

TEST_CASE("artifact file round trip") {
  std::mt19937_64 rng(8);
  const auto [train, val] = toy_sets(rng);
  for (auto variant : {SelectionVariant::Full, SelectionVariant::SpatialOnly,
                       SelectionVariant::ChannelOnly, SelectionVariant::None}) {
    CalibrationConfig cfg;
    cfg.variant = variant;
    cfg.seeds = {{"data", 3}};
    const auto a = calibrate(train, val, cfg).artifact;
    const std::string bytes = encode_artifact(a);
    CHECK(bytes.substr(0, 4) == "DCAL");
    const auto b = decode_artifact(bytes);
    CHECK(encode_artifact(b) == bytes);
    CHECK(b.weights.spatial == a.weights.spatial);
    CHECK(b.weights.channel == a.weights.channel);
    CHECK(b.head.weights == a.head.weights);
    CHECK(b.head.bias == a.head.bias);
    CHECK(b.gamma == a.gamma);
    CHECK(b.variant == variant);
    CHECK(b.seeds == a.seeds);
    CHECK(b.spatial_class_means.size() == a.spatial_class_means.size());
    for (const auto& t : val) {
      const auto r1 = score_sample(a, t), r2 = score_sample(b, t);
      CHECK(r1.s_fused == r2.s_fused);
      CHECK(r1.decision == r2.decision);
    }
    testutil::TempDir dir;
    write_artifact(a, dir / "a.dcal");
    CHECK(read_file(dir / "a.dcal") == bytes);
    CHECK(encode_artifact(read_artifact(dir / "a.dcal")) == bytes);
  }
}

TEST_CASE("malformed artifacts are rejected") {
  std::mt19937_64 rng(9);
  const auto [train, val] = toy_sets(rng);
  const std::string bytes = encode_artifact(calibrate(train, val, CalibrationConfig{}).artifact);
  CHECK_THROWS_AS(decode_artifact("XCAL" + bytes.substr(4)), ParseError);
  CHECK_THROWS_AS(decode_artifact(bytes.substr(0, bytes.size() - 8)), ParseError);
  CHECK_THROWS_AS(decode_artifact(bytes.substr(0, 12)), ParseError);
  CHECK_THROWS_AS(decode_artifact(bytes + "z"), ParseError);
}

TEST_CASE("score report JSON keys") {
  ScoreReport r{1.5, 2.0, -0.3, Decision::OOD, 2};
  const auto j = to_json(r);
  CHECK(j["s_energy"] == 1.5);
  CHECK(j["g_norm"] == 2.0);
  CHECK(j["s_fused"] == -0.3);
  CHECK(j["decision"] == "OOD");
  CHECK(j["predicted_class"] == 2);
}
