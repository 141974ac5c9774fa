#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "doanav/ad/grad_check.hpp"
#include "doanav/model/checkpoint.hpp"
#include "doanav/model/policy.hpp"
#include "support.hpp"

using namespace doanav;
using namespace doanav::model;
using ad::Tape;
using ad::Tensor;
using testing_support::random_tensor;
using testing_support::weighted_sum;

namespace {

ModelConfig tiny_cfg() {
  ModelConfig c;
  c.num_classes = 4;
  c.image_grid = 2;
  c.d_img = 3;
  c.d_vis = 3;
  c.embed_dim = 4;
  c.head_dim = 4;
  c.num_heads = 2;
  c.reducer_hidden = 5;
  c.lstm_input = 4;
  c.lstm_hidden = 4;
  c.gcn_dim = 4;
  return c;
}

// Random observation; conf values straddle the filter threshold.
sim::Observation random_obs(const ModelConfig& c, std::mt19937_64& rng) {
  sim::Observation o;
  o.image = random_tensor(c.image_cells(), c.d_img, rng);
  o.objects = random_tensor(c.num_classes, c.detection_width(), rng);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::size_t w = o.objects.cols();
  for (int q = 0; q < c.num_classes; ++q) {
    for (std::size_t k = c.d_vis; k < w - 2; ++k) o.objects(q, k) = u(rng);
    o.objects(q, w - 2) = q % 2 == 0 ? 0.7 + 0.2 * u(rng) : 0.5 * u(rng);
    o.objects(q, w - 1) = q == 1 ? 1.0 : 0.0;
  }
  return o;
}

// Perturbs every parameter away from its structured init (zero G_n, unit r).
void scramble(ModelParams& p, std::uint64_t seed, double scale = 0.5) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, scale);
  for (auto& prm : p.store.params())
    for (double& v : prm.value.values()) v += n(rng);
}

std::vector<double> vec(const Tensor& t) { return t.values(); }

}  // namespace

TEST_CASE("intrinsic attention examples") {
  Tape tape;
  Var zeros = tape.constant(Tensor(5, 5));
  for (int p = 0; p < 5; ++p)
    for (double v : intrinsic_attention(zeros, p, false).value().values()) CHECK(v == doctest::Approx(0.2));
  CHECK_THROWS_AS(intrinsic_attention(zeros, 5, false), std::out_of_range);
  CHECK_THROWS_AS(intrinsic_attention(zeros, -1, false), std::out_of_range);
}

TEST_CASE("directedness: edges ending elsewhere never move G_t(p)") {
  std::mt19937_64 rng(3);
  const int n = 6;
  const Tensor base = random_tensor(n, n, rng);
  for (int trial = 0; trial < 200; ++trial) {
    const int p = trial % n;
    Tensor pert = base;
    std::normal_distribution<double> noise(0.0, 3.0);
    for (int r = 0; r < n; ++r)
      if (r != p)
        for (int c = 0; c < n; ++c) pert(r, c) += noise(rng);
    Tape tape;
    CHECK(intrinsic_attention(tape.constant(base), p, false).value() ==
          intrinsic_attention(tape.constant(pert), p, false).value());
  }
}

TEST_CASE("undirected toggle symmetrizes the logits exactly") {
  std::mt19937_64 rng(4);
  Tape tape;
  const Tensor l = intrinsic_logits(tape.constant(random_tensor(7, 7, rng)), true).value();
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j) CHECK(l(i, j) == l(j, i));
}

TEST_CASE("image query examples") {
  std::mt19937_64 rng(5);
  Tape tape;
  Var oi = tape.constant(random_tensor(3, 4, rng));
  const Tensor q0 = image_query(tape.constant(Tensor(4, 2)), oi, 2).value();
  CHECK(q0 == Tensor::row({0, 0, oi.value()(2, 0), oi.value()(2, 1), oi.value()(2, 2), oi.value()(2, 3)}));

  const Tensor single = random_tensor(1, 3, rng);
  const Tensor q1 = image_query(tape.constant(single), oi, 0).value();
  for (int k = 0; k < 3; ++k) CHECK(q1[k] == single[k]);

  const Tensor img = Tensor::from_rows({{1, 2}, {3, 5}, {-1, 8}});
  const Tensor q2 = image_query(tape.constant(img), oi, 1).value();
  CHECK(q2[0] == doctest::Approx(1.0));
  CHECK(q2[1] == doctest::Approx(5.0));
  CHECK(q2[2] == oi.value()(1, 0));
  CHECK_THROWS_AS(image_query(tape.constant(img), oi, 3), std::out_of_range);
}

TEST_CASE("confidence filter examples") {
  // Three rows of width 7 (d_vis 1); conf sits in the second-to-last column.
  Tensor s(3, 7);
  s(0, 5) = 0.7;
  s(1, 5) = 0.6;
  s(2, 5) = 0.59;
  const auto m = confidence_filter(s, 0.6);
  CHECK(m.mask == std::vector<bool>{true, false, false});
  CHECK(m.kept == std::vector<std::size_t>{0});
  CHECK(confidence_filter(s, 0.0).kept.size() == 3);
  CHECK(confidence_filter(Tensor(3, 7), 0.0).empty());
}

TEST_CASE("view-adaptive graph examples") {
  std::mt19937_64 rng(6);
  Tape tape;
  const int heads = 3, hd = 2;
  Var query = tape.constant(random_tensor(1, 5, rng));
  Tensor obj = random_tensor(4, 7, rng);
  Var wq = tape.constant(random_tensor(5, heads * hd, rng));
  Var wk = tape.constant(random_tensor(7, heads * hd, rng));
  Var wo = tape.constant(Tensor::from_rows({{0.2}, {0.5}, {-0.1}}));

  SUBCASE("single survivor gets the summed head weights") {
    ConfidenceMask m{{false, false, true, false}, {2}};
    const Tensor g = view_adaptive_graph(query, tape.constant(obj), m, wq, wk, wo, heads, hd).value();
    CHECK(g == Tensor::row({0, 0, 0.2 + 0.5 - 0.1, 0}));
  }
  SUBCASE("identical rows score equally") {
    for (int k = 0; k < 7; ++k) obj(3, k) = obj(1, k);
    ConfidenceMask m{{false, true, false, true}, {1, 3}};
    const Tensor g = view_adaptive_graph(query, tape.constant(obj), m, wq, wk, wo, heads, hd).value();
    CHECK(g[1] == g[3]);
    CHECK(g[0] == 0.0);
  }
  SUBCASE("empty mask gives zeros") {
    ConfidenceMask m{{false, false, false, false}, {}};
    CHECK(view_adaptive_graph(query, tape.constant(obj), m, wq, wk, wo, heads, hd).value() == Tensor(1, 4));
  }
  SUBCASE("hand-computed single head") {
    // N = 3, HD = 2, NH = 1 with identity projections.
    Var q = tape.constant(Tensor::row({1.0, 2.0}));
    Var keys = tape.constant(Tensor::from_rows({{1, 0}, {0, 1}, {1, 1}}));
    Var eye = tape.constant(Tensor::from_rows({{1, 0}, {0, 1}}));
    Var out = tape.constant(Tensor::from_rows({{1.0}}));
    ConfidenceMask m{{true, true, true}, {0, 1, 2}};
    const Tensor g = view_adaptive_graph(q, keys, m, eye, eye, out, 1, 2).value();
    const double s0 = 1 / std::sqrt(2.0), s1 = 2 / std::sqrt(2.0), s2 = 3 / std::sqrt(2.0);
    const double z = std::exp(s0) + std::exp(s1) + std::exp(s2);
    CHECK(g[0] == doctest::Approx(std::exp(s0) / z).epsilon(1e-12));
    CHECK(g[1] == doctest::Approx(std::exp(s1) / z).epsilon(1e-12));
    CHECK(g[2] == doctest::Approx(std::exp(s2) / z).epsilon(1e-12));
  }
}

TEST_CASE("object attention reductions are exact") {
  std::mt19937_64 rng(7);
  Tape tape;
  Var gi = tape.constant(random_tensor(1, 6, rng));
  Var gv = tape.constant(random_tensor(1, 6, rng));
  Var one = tape.constant(Tensor::scalar(1.0)), zero = tape.constant(Tensor::scalar(0.0));
  CHECK(object_attention(gi, gv, one, zero).value() == gi.value());
  CHECK(object_attention(gi, gv, zero, one).value() == gv.value());

  Var uniform = tape.constant(Tensor(1, 22, 1.0 / 22));
  Tensor hot(1, 22);
  hot[4] = 1.0;
  const Tensor g = object_attention(uniform, tape.constant(hot), tape.constant(Tensor::scalar(0.95)),
                                    tape.constant(Tensor::scalar(0.05)))
                       .value();
  CHECK(*std::max_element(g.values().begin(), g.values().end()) == doctest::Approx(0.95 / 22 + 0.05));
}

TEST_CASE("uaoa examples") {
  std::mt19937_64 rng(8);
  Tape tape;
  Var s = tape.constant(random_tensor(4, 3, rng));
  Tensor g = random_tensor(1, 4, rng);
  g[2] = 0.0;
  const Tensor out = uaoa(s, tape.constant(g)).value();
  for (int k = 0; k < 3; ++k) CHECK(out(2, k) == 0.0);
  CHECK(uaoa(s, tape.constant(Tensor(1, 4, 1.0))).value() == s.value());
  for (double c : {0.0, 0.5, 2.0, 3.7}) {
    Tensor cg = g;
    for (double& v : cg.values()) v *= c;
    const Tensor lhs = uaoa(s, tape.constant(cg)).value();
    for (std::size_t i = 0; i < lhs.size(); ++i) CHECK(lhs[i] == doctest::Approx(c * out[i]).epsilon(1e-14));
  }
  // Doubling is exact in binary floating point.
  Tensor g2 = g;
  for (double& v : g2.values()) v *= 2.0;
  const Tensor d = uaoa(s, tape.constant(g2)).value();
  for (std::size_t i = 0; i < d.size(); ++i) CHECK(d[i] == 2.0 * out[i]);
}

TEST_CASE("object semantics examples") {
  std::mt19937_64 rng(9);
  Tape tape;
  Var oi = tape.constant(random_tensor(3, 4, rng));
  ConfidenceMask one{{false, true, false}, {1}};
  CHECK(object_semantics(tape.constant(Tensor::row({0.4, 1.0, 0.9})), oi, one).value() ==
        ad::Tensor({1, 4}, {oi.value()(1, 0), oi.value()(1, 1), oi.value()(1, 2), oi.value()(1, 3)}));
  ConfidenceMask none{{false, false, false}, {}};
  CHECK(object_semantics(tape.constant(Tensor::row({1, 1, 1})), oi, none).value() == Tensor(1, 4));
  ConfidenceMask two{{true, false, true}, {0, 2}};
  const Tensor d = object_semantics(tape.constant(Tensor::row({0.3, 5.0, 0.7})), oi, two).value();
  for (int k = 0; k < 4; ++k) CHECK(d[k] == doctest::Approx(0.3 * oi.value()(0, k) + 0.7 * oi.value()(2, k)));
}

TEST_CASE("position-aware image examples") {
  std::mt19937_64 rng(10);
  Tape tape;
  Var w1 = tape.constant(random_tensor(3, 5, rng));
  Var w2 = tape.constant(random_tensor(5, 4, rng));
  Var zeros = tape.constant(Tensor(4, 3));
  PixelEmbedding none;
  CHECK(position_aware_image(zeros, w1, w2, none).value() == Tensor(4, 4));
  PixelEmbedding one;
  one.mode = PixelEmbed::OneD;
  one.index = tape.constant(random_tensor(4, 4, rng));
  CHECK(position_aware_image(zeros, w1, w2, one).value() == one.index->value());
  PixelEmbedding two;
  two.mode = PixelEmbed::TwoD;
  two.grid = 2;
  two.row = tape.constant(random_tensor(2, 4, rng));
  two.col = tape.constant(random_tensor(2, 4, rng));
  const Tensor t = position_aware_image(zeros, w1, w2, two).value();
  CHECK(t(3, 1) == two.row->value()(1, 1) + two.col->value()(1, 1));
  CHECK(t(1, 0) == two.row->value()(0, 0) + two.col->value()(1, 0));
  // Outer ReLU leaves nonnegative pre-activations alone.
  Var pos_w2 = tape.constant(Tensor(5, 4, 0.25));
  Var img = tape.constant(random_tensor(4, 3, rng));
  const Tensor inner = ad::matmul(ad::relu(ad::matmul(img, w1)), pos_w2).value();
  CHECK(position_aware_image(img, w1, pos_w2, none).value() == inner);
  one.index = tape.constant(Tensor(3, 4));
  CHECK_THROWS_AS(position_aware_image(zeros, w1, w2, one), ad::DimensionError);
}

TEST_CASE("uaia examples") {
  std::mt19937_64 rng(11);
  Tape tape;
  const int heads = 2, hd = 3;
  Var d = tape.constant(random_tensor(1, 4, rng));
  Var wq = tape.constant(random_tensor(4, heads * hd, rng));
  Var wk = tape.constant(random_tensor(4, heads * hd, rng));
  Var wv = tape.constant(random_tensor(4, heads * hd, rng));
  Var wo = tape.constant(random_tensor(heads * hd, 4, rng));
  const Tensor pixel = random_tensor(1, 4, rng);
  const Tensor single = uaia(d, tape.constant(pixel), wq, wk, wv, wo, heads, hd).value();
  const Tensor direct = ad::matmul(ad::matmul(tape.constant(pixel), wv), wo).value();
  for (int k = 0; k < 4; ++k) CHECK(single[k] == doctest::Approx(direct[k]).epsilon(1e-14));

  Tensor same(5, 4);
  for (int r = 0; r < 5; ++r)
    for (int k = 0; k < 4; ++k) same(r, k) = pixel[k];
  const Tensor repeated = uaia(d, tape.constant(same), wq, wk, wv, wo, heads, hd).value();
  for (int k = 0; k < 4; ++k) CHECK(repeated[k] == doctest::Approx(single[k]).epsilon(1e-12));

  // M = 2, HD = 1, NH = 1 with hand-set weights.
  Var q = tape.constant(Tensor::row({2.0}));
  Var img = tape.constant(Tensor::from_rows({{1.0}, {-1.0}}));
  Var w = tape.constant(Tensor::scalar(1.0));
  Var wv3 = tape.constant(Tensor::scalar(3.0));
  const double a = std::exp(2.0) / (std::exp(2.0) + std::exp(-2.0));
  CHECK(uaia(q, img, w, w, wv3, w, 1, 1).value()[0] == doctest::Approx(3.0 * a - 3.0 * (1 - a)).epsilon(1e-12));

  // Relative bias shifts scores: a huge bias on pixel 1 puts all weight there.
  Var bias = tape.constant(Tensor::row({0.0, 100.0}));
  CHECK(uaia(q, img, w, w, wv3, w, 1, 1, bias).value()[0] == doctest::Approx(-3.0));
}

TEST_CASE("relative score bias maps offsets symmetrically") {
  Tape tape;
  Var table = tape.constant(Tensor::row({10, 11, 12, 13}));  // grid 3 -> 2 x 2 offsets
  const Tensor b = relative_score_bias(table, 3).value();
  CHECK(b == Tensor::row({13, 12, 13, 11, 10, 11, 13, 12, 13}));
  CHECK_THROWS_AS(relative_score_bias(table, 5), ad::DimensionError);
}

TEST_CASE("abed examples") {
  std::mt19937_64 rng(12);
  Tape tape;
  Var s = tape.constant(random_tensor(1, 3, rng));
  Var i = tape.constant(random_tensor(1, 3, rng));
  Var a = tape.constant(random_tensor(1, 3, rng));
  Var f = tape.constant(random_tensor(9, 5, rng));
  auto r = [&](double v) { return tape.constant(Tensor::scalar(v)); };
  BranchWeights plain{BranchToken::None, {}, {}, {}, {}, {}, {}, f};
  BranchWeights ed{BranchToken::Ed, r(1), r(1), r(1), {}, {}, {}, f};
  CHECK(abed_fuse(s, i, a, plain).value() == abed_fuse(s, i, a, ed).value());

  BranchWeights no_image{BranchToken::Ed, r(0.7), r(0.0), r(1.3), {}, {}, {}, f};
  CHECK(abed_fuse(s, i, a, no_image).value() ==
        abed_fuse(s, tape.constant(random_tensor(1, 3, rng)), a, no_image).value());

  BranchWeights scaled{BranchToken::Ed, r(0.7 * 2), r(0.0), r(1.3 * 2), {}, {}, {}, f};
  const Tensor base = abed_fuse(s, i, a, no_image).value();
  const Tensor twice = abed_fuse(s, i, a, scaled).value();
  for (std::size_t k = 0; k < base.size(); ++k) CHECK(twice[k] == doctest::Approx(2 * base[k]).epsilon(1e-14));

  Var zero3 = tape.constant(Tensor(1, 3));
  BranchWeights bs{BranchToken::Bs, {}, {}, {}, zero3, zero3, zero3, f};
  CHECK(abed_fuse(s, i, a, bs).value() == abed_fuse(s, i, a, plain).value());
  BranchWeights broken{BranchToken::Ed, {}, {}, {}, {}, {}, {}, f};
  CHECK_THROWS_AS(abed_fuse(s, i, a, broken), std::invalid_argument);
}

TEST_CASE("done reminder examples") {
  const std::vector<double> l{0.1, -0.3, 0.5, 0.0, 0.2, -1.0};
  CHECK(done_reminder(l, 0.0, 0.6, 2.0) == l);
  CHECK(done_reminder(l, 0.59, 0.6, 2.0) == l);
  const auto boosted = done_reminder(l, 0.9, 0.6, 2.0);
  CHECK(boosted[5] == doctest::Approx(-1.0 + 1.8));
  for (int k = 0; k < 5; ++k) CHECK(boosted[k] == l[k]);
  CHECK_THROWS_AS(done_reminder(std::vector<double>(5), 0.9, 0.6, 2.0), ad::DimensionError);
}

TEST_CASE("gcn baseline examples") {
  std::mt19937_64 rng(13);
  Tape tape;
  const int dv = 2;
  Tensor obj = random_tensor(3, dv + 6, rng);
  for (int q = 1; q < 3; ++q)
    for (int k = dv; k < dv + 6; ++k) obj(q, k) = obj(0, k);
  Var adj;
  gcn_baseline(tape.constant(obj), tape.constant(random_tensor(6, 2, rng)),
               tape.constant(random_tensor(dv + 6, 4, rng)), dv, &adj);
  for (double v : adj.value().values()) CHECK(v == doctest::Approx(1.0 / 3).epsilon(1e-12));

  // N = 2, W_a = e_conf: z_q = conf_q, A = softmax_rows(z zᵀ).
  Tensor two(2, dv + 6);
  two(0, dv + 4) = 1.0;
  two(1, dv + 4) = 2.0;
  Tensor wa(6, 1);
  wa(4, 0) = 1.0;
  gcn_baseline(tape.constant(two), tape.constant(wa), tape.constant(random_tensor(dv + 6, 4, rng)), dv, &adj);
  const Tensor& A = adj.value();
  CHECK(A(0, 0) == doctest::Approx(std::exp(1.0) / (std::exp(1.0) + std::exp(2.0))));
  CHECK(A(1, 1) == doctest::Approx(std::exp(4.0) / (std::exp(2.0) + std::exp(4.0))));
  for (int r = 0; r < 2; ++r) CHECK(std::abs(A(r, 0) + A(r, 1) - 1.0) < 1e-12);
}

TEST_CASE("normalization holds over random instances") {
  const ModelConfig cfg = tiny_cfg();
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    ModelConfig c = cfg;
    c.use_gcn_baseline = seed % 2 == 1;
    ModelParams p = ModelParams::create(c, seed);
    scramble(p, seed + 1000, 1.0);
    std::mt19937_64 rng(seed);
    const auto obs = random_obs(c, rng);
    Tape tape;
    ad::ParamBinding bind(tape, p.store);
    ForwardPass fp(p, bind);
    ForwardTrace tr;
    auto h = tape.constant(Tensor(1, c.lstm_hidden));
    fp.step(obs, static_cast<int>(seed % 4), kStartActionToken, h, h, false, nullptr, &tr);
    auto row_sums_ok = [](const Tensor& t) {
      for (std::size_t r = 0; r < t.rows(); ++r) {
        double s = 0.0;
        for (std::size_t k = 0; k < t.cols(); ++k) s += t(r, k);
        if (std::abs(s - 1.0) > 1e-9) return false;
      }
      return true;
    };
    CHECK(row_sums_ok(ad::softmax_rows(tape.constant(p.store.value(p.ids.intrinsic_graph))).value()));
    for (const auto& t : tr.vag.rows) CHECK(row_sums_ok(t));
    for (const auto& t : tr.uaia.rows) CHECK(row_sums_ok(t));
    if (tr.gcn_adjacency) CHECK(row_sums_ok(tr.gcn_adjacency->value()));
  }
}

TEST_CASE("forward pass toggles") {
  std::mt19937_64 rng(14);
  const ModelConfig base = tiny_cfg();
  const auto obs = random_obs(base, rng);

  auto run = [&](const ModelConfig& c, std::uint64_t seed) {
    ModelParams p = ModelParams::create(c, seed);
    scramble(p, seed);
    Tape tape;
    ad::ParamBinding bind(tape, p.store);
    ForwardPass fp(p, bind);
    auto h = tape.constant(Tensor(1, c.lstm_hidden));
    auto out = fp.step(obs, 1, 2, h, h, false, nullptr);
    std::vector<double> r = vec(out.logits.value());
    r.push_back(out.value.value().item());
    return std::make_pair(r, out.attention);
  };

  SUBCASE("all toggles off still produces finite output") {
    ModelConfig c = base;
    c.use_uaoa = c.use_uaia = c.use_ig = c.use_vag = c.use_cf = false;
    c.branch_token = BranchToken::None;
    c.pixel_embed = PixelEmbed::None;
    auto [out, att] = run(c, 1);
    for (double v : out) CHECK(std::isfinite(v));
    CHECK(att.values.size() == 4);
  }
  SUBCASE("vag off leaves w_n times the intrinsic column") {
    ModelConfig c = base;
    c.use_vag = false;
    ModelParams p = ModelParams::create(c, 2);
    scramble(p, 2);
    Tape tape;
    ad::ParamBinding bind(tape, p.store);
    ForwardPass fp(p, bind);
    auto h = tape.constant(Tensor(1, c.lstm_hidden));
    auto out = fp.step(obs, 3, 0, h, h, false, nullptr);
    const Tensor gi = intrinsic_attention(tape.constant(p.store.value(p.ids.intrinsic_graph)), 3, false).value();
    const double wn = p.store.value(p.ids.weight_intrinsic).item();
    for (int q = 0; q < 4; ++q) CHECK(out.attention.values[q] == gi[q] * wn);
  }
  SUBCASE("every ablation variant runs") {
    for (auto pe : {PixelEmbed::None, PixelEmbed::OneD, PixelEmbed::TwoD, PixelEmbed::Relative})
      for (auto bt : {BranchToken::Ed, BranchToken::Bs, BranchToken::None})
        for (bool undirected : {false, true}) {
          ModelConfig c = base;
          c.pixel_embed = pe;
          c.branch_token = bt;
          c.undirected_doa = undirected;
          for (double v : run(c, 3).first) CHECK(std::isfinite(v));
        }
  }
  SUBCASE("deterministic") { CHECK(run(base, 4).first == run(base, 4).first); }
  SUBCASE("zero actor weights give uniform logits") {
    ModelParams p = ModelParams::create(base, 5);
    p.store.value(p.ids.actor_w).fill(0.0);
    p.store.value(p.ids.actor_b).fill(0.0);
    Tape tape;
    ad::ParamBinding bind(tape, p.store);
    ForwardPass fp(p, bind);
    auto h = tape.constant(Tensor(1, base.lstm_hidden));
    const Tensor l = fp.step(obs, 0, 1, h, h, false, nullptr).logits.value();
    for (double v : l.values()) CHECK(v == 0.0);
  }
  SUBCASE("value head ignores actor weights") {
    ModelParams p = ModelParams::create(base, 6);
    auto value_of = [&](const ModelParams& mp) {
      Tape tape;
      ad::ParamBinding bind(tape, mp.store);
      ForwardPass fp(mp, bind);
      auto h = tape.constant(Tensor(1, base.lstm_hidden));
      return fp.step(obs, 0, 1, h, h, false, nullptr).value.value().item();
    };
    const double v0 = value_of(p);
    for (double& v : p.store.value(p.ids.actor_w).values()) v += 1.0;
    CHECK(value_of(p) == v0);
  }
}

TEST_CASE("full model gradients match finite differences") {
  for (bool gcn : {false, true}) {
    ModelConfig c = tiny_cfg();
    c.use_gcn_baseline = gcn;
    c.pixel_embed = gcn ? PixelEmbed::TwoD : PixelEmbed::OneD;
    ModelParams p = ModelParams::create(c, 21);
    scramble(p, 22, 0.3);
    std::mt19937_64 rng(23);
    const auto o1 = random_obs(c, rng);
    const auto o2 = random_obs(c, rng);
    auto loss = [&](ad::ParamBinding& bind) {
      ForwardPass fp(p, bind);
      Var h = bind.tape().constant(Tensor(1, c.lstm_hidden));
      Var cc = h;
      auto s1 = fp.step(o1, 1, kStartActionToken, h, cc, false, nullptr);
      auto s2 = fp.step(o2, 1, 3, s1.h, s1.c, false, nullptr);
      return ad::add(ad::add(weighted_sum(s1.logits, 1), weighted_sum(s2.logits, 2)),
                     ad::add(weighted_sum(s1.value, 3), weighted_sum(s2.value, 4)));
    };
    const auto res = ad::grad_check(loss, p.store);
    INFO("worst param " << res.worst_param << " index " << res.worst_index);
    CHECK(res.max_relative_error < 1e-3);
    CHECK(res.coords_checked == p.store.element_count());
  }
}

TEST_CASE("checkpoint round trip and compatibility") {
  const ModelConfig c = tiny_cfg();
  ModelParams p = ModelParams::create(c, 31);
  scramble(p, 32);
  const auto dir = std::filesystem::temp_directory_path() / "doanav_ckpt_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "ckpt.json";
  save_checkpoint(p, path);
  const ModelParams back = load_checkpoint(path);
  REQUIRE(back.store.size() == p.store.size());
  for (std::size_t i = 0; i < p.store.size(); ++i) {
    CHECK(back.store.name(i) == p.store.name(i));
    CHECK(back.store.value(i) == p.store.value(i));
  }
  CHECK_NOTHROW(ensure_compatible(back, c));
  ModelConfig other = c;
  other.embed_dim = 6;
  CHECK_THROWS_AS(ensure_compatible(back, other), CheckpointError);

  std::ofstream(dir / "bad.json") << "{\"format\": \"something-else\"}";
  CHECK_THROWS_AS(load_checkpoint(dir / "bad.json"), CheckpointError);
  CHECK_THROWS_AS(load_checkpoint(dir / "missing.json"), CheckpointError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("init follows the documented starting point") {
  const ModelParams p = ModelParams::create(tiny_cfg(), 1);
  for (double v : p.store.value(p.ids.intrinsic_graph).values()) CHECK(v == 0.0);
  CHECK(p.store.value(p.ids.weight_intrinsic).item() == 0.95);
  CHECK(p.store.value(p.ids.weight_view).item() == 0.05);
  CHECK(p.store.value(p.ids.abed_r1).item() == 1.0);
  CHECK(p.store.value(p.ids.prev_action).rows() == 7);
  ModelConfig bad = tiny_cfg();
  CHECK_THROWS(set_toggle(bad, "use_warp_drive", true));
}
