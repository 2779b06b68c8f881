#include "doctest.h"
#include "oracles.hpp"

#include "videogem/prompt.hpp"
#include "videogem/toy_backbone.hpp"

#include <cmath>

using namespace videogem;

TEST_SUITE("prompt") {

TEST_CASE("templates") {
  const PromptSet p = render_prompts(std::string("cutting"), std::string("onion"), "cutting onion");
  CHECK(p.verb == "A photo of a person cutting something.");
  CHECK(p.object == "A photo of a person using onion.");
  CHECK(p.action == "A photo of a person cutting onion.");

  CHECK(render_prompts(std::nullopt, std::string("ball"), "ball juggling").verb ==
        "A photo of a person doing something.");
  CHECK(render_prompts(std::string("waving"), std::nullopt, "waving").object == "A photo of a person.");
  CHECK_THROWS_AS(render_prompts(std::nullopt, std::nullopt, ""), InvalidInput);
}

TEST_CASE("underscore labels") {
  const Decomposition d = decompose_underscore("cutting_onion");
  CHECK(*d.verb == "cutting");
  CHECK(*d.object == "onion");
  CHECK(d.action == "cutting onion");
  CHECK(*d.verb + "_" + *d.object == "cutting_onion");

  const Decomposition solo = decompose_underscore("dancing");
  CHECK(*solo.verb == "dancing");
  CHECK(!solo.object);

  const Decomposition multi = decompose_underscore("ride_horse_fast");
  CHECK(*multi.verb == "ride");
  CHECK(*multi.object == "horse_fast");
  CHECK(render_prompts(multi).object == "A photo of a person using horse fast.");
  CHECK(render_prompts(multi).action == "A photo of a person ride horse fast.");
  CHECK_THROWS_AS(decompose_underscore(""), InvalidInput);
}

TEST_CASE("rule-based extractor") {
  RuleBasedExtractor ex;
  const Components c = ex.extract("spread the butter on the pan");
  CHECK(c.verbs == std::vector<std::string>{"spread"});
  CHECK(c.objects == std::vector<std::string>{"butter", "pan"});
  const Components dancing = ex.extract("dancing");
  CHECK(dancing.verbs == std::vector<std::string>{"dancing"});
  CHECK(dancing.objects.empty());
}

TEST_CASE("natural labels pick the most visible object") {
  const ToyBackbone bb = ToyBackbone::load(oracle::data_dir() / "fixtures/toy_seed42.bin");
  const VectorXd visual = bb.forward_with_trace(oracle::noise_batch(1, 4, 4, 21)).cls_joint();
  const StaticExtractor ex(Components{{"spread"}, {"butter", "pan"}});
  const Decomposition d = decompose_label("spread the butter on the pan", LabelStyle::natural, &ex, &bb, &visual);
  REQUIRE(d.verb);
  REQUIRE(d.object);
  CHECK(*d.verb == "spread");
  CHECK(d.action == "spread the butter on the pan");

  // Selection oracle.
  const auto score = [&](const std::string& prompt) {
    return oracle::cosine(oracle::vec_from(bb.encode_text(prompt).vector), oracle::vec_from(visual));
  };
  const std::string oracle_pick =
      score("A photo of a person using butter.") > score("A photo of a person using pan.") ? "butter" : "pan";
  CHECK(*d.object == oracle_pick);
  // Frozen winner for this fixture.
  CHECK(*d.object == "pan");

  const Decomposition solo = decompose_label("dancing", LabelStyle::natural, &ex, &bb, &visual);
  CHECK(solo.verb);
  RuleBasedExtractor rules;
  const Decomposition dancing = decompose_label("dancing", LabelStyle::natural, &rules, &bb, &visual);
  CHECK(*dancing.verb == "dancing");
  CHECK(!dancing.object);
  CHECK(render_prompts(dancing).object == "A photo of a person.");

  CHECK_THROWS_AS(decompose_label("x y", LabelStyle::natural, nullptr, &bb, &visual), InvalidInput);
}

TEST_CASE("center fusion") {
  const FusionWeights w;
  const Point c = combine_centers({0, 0}, {10, 0}, {0, 10}, w);
  CHECK(c.x == doctest::Approx(2.0));
  CHECK(c.y == doctest::Approx(6.0));

  const Point same = combine_centers({3, 7}, {3, 7}, {3, 7}, w);
  CHECK(same.x == doctest::Approx(3.0));
  CHECK(same.y == doctest::Approx(7.0));

  const Point v = combine_centers({4, 9}, {1, 1}, {2, 2}, FusionWeights{1, 0, 0});
  CHECK(v.x == 4.0);
  CHECK(v.y == 9.0);

  CHECK_THROWS_AS(combine_centers({0, 0}, {0, 0}, {0, 0}, FusionWeights{0.5, 0.5, 0.5}), InvalidInput);
  CHECK_THROWS_AS(combine_centers({0, 0}, {0, 0}, {0, 0}, FusionWeights{-0.2, 0.6, 0.6}), InvalidInput);
}

TEST_CASE("pixel rounding") {
  CHECK(round_to_pixel({2.0, 6.0}).x == 2.0);
  CHECK(round_to_pixel({2.4, 6.6}).x == 2.0);
  CHECK(round_to_pixel({2.4, 6.6}).y == 7.0);
  CHECK(round_to_pixel({2.5, 3.5}).x == 2.0);
  CHECK(round_to_pixel({2.5, 3.5}).y == 3.0);
}

TEST_CASE("heatmap merging on 2x2 maps") {
  Heatmap v{MatrixXd(2, 2)}, o{MatrixXd(2, 2)}, a{MatrixXd(2, 2)};
  v.grid << 1.0, 0.5, 0.25, 1.0;
  o.grid << 0.5, 1.0, 1.0, 0.25;
  a.grid << 0.25, 1.0, 0.5, 0.5;

  MergePolicy avg{MergeStrategy::heatmap_average, {1, 1, 3}};
  // Weighted means 0.45, 0.9, 0.55, 0.55; then min-max.
  MatrixXd expected_avg(2, 2);
  expected_avg << 0.0, 1.0, 0.1 / 0.45, 0.1 / 0.45;
  CHECK((merge_heatmaps(v, o, a, avg).grid - expected_avg).cwiseAbs().maxCoeff() < oracle::kMergeTol);

  MergePolicy mul{MergeStrategy::heatmap_multiply, {1, 1, 3}};
  // log2 of the products: -1.4, -0.2, -1.0, -1.0.
  const double lo = std::pow(2.0, -1.4), hi = std::pow(2.0, -0.2), mid = 0.5;
  MatrixXd expected_mul(2, 2);
  expected_mul << 0.0, 1.0, (mid - lo) / (hi - lo), (mid - lo) / (hi - lo);
  CHECK((merge_heatmaps(v, o, a, mul).grid - expected_mul).cwiseAbs().maxCoeff() < oracle::kMergeTol);
}

TEST_CASE("merge identities") {
  Heatmap m{MatrixXd(2, 3)};
  m.grid << 0.0, 0.2, 1.0, 0.4, 0.6, 0.8;
  MergePolicy avg{MergeStrategy::heatmap_average, {1, 1, 3}};
  CHECK((merge_heatmaps(m, m, m, avg).grid - m.grid).cwiseAbs().maxCoeff() < 1e-12);

  Heatmap ones{MatrixXd::Ones(2, 3)};
  Heatmap b{MatrixXd(2, 3)};
  b.grid << 0.3, 0.9, 0.1, 1.0, 0.5, 0.7;
  MergePolicy mul{MergeStrategy::heatmap_multiply, {1, 1, 3}};
  const MatrixXd prod = (m.grid.array().pow(0.2) * b.grid.array().pow(0.6)).matrix();
  const Heatmap expected = min_max_normalize(prod);
  CHECK((merge_heatmaps(m, ones, b, mul).grid - expected.grid).cwiseAbs().maxCoeff() < 1e-12);

  Heatmap wrong{MatrixXd::Ones(3, 2)};
  CHECK_THROWS_AS(merge_heatmaps(m, m, wrong, avg), InvalidInput);
  MergePolicy bad{MergeStrategy::heatmap_average, {1, 0, 3}};
  CHECK_THROWS_AS(merge_heatmaps(m, m, m, bad), InvalidInput);

  CHECK(parse_merge_strategy("mul") == MergeStrategy::heatmap_multiply);
  CHECK(parse_merge_strategy("avg") == MergeStrategy::heatmap_average);
  CHECK(!parse_merge_strategy("max"));
}

TEST_CASE("bundle json") {
  PromptBundle b;
  b.decomposition = decompose_underscore("waving");
  b.prompts = render_prompts(b.decomposition);
  const auto j = to_json(b);
  CHECK(j.at("verb") == "waving");
  CHECK(j.at("object").is_null());
  CHECK(j.at("prompts").at("object") == "A photo of a person.");
}

}
