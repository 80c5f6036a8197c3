#include <doctest.h>

#include <random>

#include "xmeval/error.hpp"
#include "xmeval/metrics.hpp"

#include "helpers.hpp"
#include "oracles.hpp"

using namespace xmeval;
using testutil::TempDir;
using testutil::write_file;

namespace {

// Gallery of `size` items with the positives placed at the given 1-indexed
// ranks. Candidate at rank i is named r001, r002, ...
struct Placed {
  RankedList ranked;
  std::vector<PositiveAnnotation> positives;
};

Placed place_positives(std::size_t size, const std::vector<std::size_t>& ranks,
                       Judgment j = Judgment::Yes) {
  Placed p;
  p.ranked.query = "q";
  for (std::size_t i = 1; i <= size; ++i)
    p.ranked.candidates.push_back(testutil::item_name("r", i));
  for (std::size_t rank : ranks)
    p.positives.push_back({testutil::item_name("r", rank), j, {"src"}});
  return p;
}

MatchVector binary(const Placed& p) {
  return match_vector(p.ranked, p.positives, CreditMode::Binary);
}

}  // namespace

TEST_CASE("match_vector marks credits by rank") {
  auto p = place_positives(5, {2, 4});
  MatchVector m = binary(p);
  CHECK(m.values == std::vector<double>{0, 1, 0, 1, 0});
  CHECK(m.positive_count == 2);

  SUBCASE("positives absent from the gallery still count toward R") {
    p.positives.push_back({"not_in_gallery", Judgment::Yes, {"src"}});
    MatchVector m2 = binary(p);
    CHECK(m2.positive_count == 3);
    CHECK(m2.values == std::vector<double>{0, 1, 0, 1, 0});
  }
  SUBCASE("graded credit uses judgment weights") {
    p.positives[0].judgment = Judgment::WeakYes;
    MatchVector g = match_vector(p.ranked, p.positives, CreditMode::Graded);
    CHECK(g.values == std::vector<double>{0, 0.5, 0, 1, 0});
  }
  SUBCASE("empty positives throw") {
    CHECK_THROWS_AS(match_vector(p.ranked, {}, CreditMode::Binary),
                    std::invalid_argument);
  }
  SUBCASE("negative judgments do not belong in ground truth") {
    p.positives[0].judgment = Judgment::WeakNo;
    CHECK_THROWS_AS(binary(p), std::invalid_argument);
  }
  SUBCASE("duplicate candidates are rejected") {
    p.positives.push_back(p.positives[0]);
    CHECK_THROWS_AS(binary(p), std::invalid_argument);
  }
}

TEST_CASE("recall and precision on hand-checked placements") {
  // Four placements over a 30-item gallery, all with R = 8. Same ranking
  // quality stories, very different truncated-mAP outcomes.
  auto a = binary(place_positives(30, {2, 3, 4, 5, 6, 7, 8, 9}));
  auto b = binary(place_positives(30, {1, 24, 25, 26, 27, 28, 29, 30}));
  auto c = binary(place_positives(30, {6, 7, 8, 9, 10, 11, 12, 13}));
  auto d = binary(place_positives(30, {5, 24, 25, 26, 27, 28, 29, 30}));

  CHECK(recall_at_k(a, 1) == 0.0);
  CHECK(recall_at_k(a, 5) == 1.0);
  CHECK(recall_at_k(b, 1) == 1.0);

  CHECK(r_precision(a) == doctest::Approx(0.875).epsilon(1e-12));
  CHECK(r_precision(b) == doctest::Approx(0.125).epsilon(1e-12));
  CHECK(r_precision(c) == doctest::Approx(0.375).epsilon(1e-12));
  CHECK(r_precision(d) == doctest::Approx(0.125).epsilon(1e-12));

  CHECK(map_at_r(a) == doctest::Approx(0.660).epsilon(0.001));
  CHECK(map_at_r(b) == doctest::Approx(0.125).epsilon(1e-12));
  CHECK(map_at_r(c) == doctest::Approx(0.103).epsilon(0.005));
  CHECK(map_at_r(d) == doctest::Approx(0.025).epsilon(1e-12));
}

TEST_CASE("recall_at_k edge cases") {
  auto p = place_positives(4, {3});
  auto m = binary(p);
  CHECK(recall_at_k(m, 2) == 0.0);
  CHECK(recall_at_k(m, 3) == 1.0);
  CHECK(recall_at_k(m, 100) == 1.0);  // k beyond gallery
  CHECK_THROWS_AS(recall_at_k(m, 0), std::invalid_argument);

  auto g = match_vector(p.ranked, {{p.ranked.candidates[0], Judgment::WeakYes, {"s"}}},
                        CreditMode::Graded);
  CHECK(recall_at_k(g, 1) == 0.5);
  CHECK_THROWS_AS(recall_at_k(g, 2), std::invalid_argument);
  CHECK_THROWS_AS(map_at_r(g), std::invalid_argument);
}

TEST_CASE("graded r_precision blends weak matches") {
  auto p = place_positives(6, {1, 2});
  p.positives[1].judgment = Judgment::WeakYes;  // r002
  auto g = match_vector(p.ranked, p.positives, CreditMode::Graded);
  // top-2 credits: 1.0 + 0.5, R = 2
  CHECK(r_precision(g) == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("class vectors and plausible matches") {
  ClassVector q{{1, 0, 1}};
  ClassVector same{{1, 0, 1}};
  ClassVector one_off{{1, 1, 1}};
  ClassVector far{{0, 1, 0}};
  CHECK(hamming_distance(q, same) == 0);
  CHECK(hamming_distance(q, one_off) == 1);
  CHECK(hamming_distance(q, far) == 3);
  CHECK(plausible_match(q, one_off, 1));
  CHECK_FALSE(plausible_match(q, one_off, 0));
  CHECK_THROWS_AS(hamming_distance(q, ClassVector{{1, 0}}), std::invalid_argument);
  // nonzero bytes count as set
  CHECK(hamming_distance(ClassVector{{2, 0}}, ClassVector{{1, 0}}) == 0);
}

TEST_CASE("pmrp on a hand-built gallery") {
  RankedList ranked{"q", {"d", "a", "b", "c"}};
  std::map<ItemId, ClassVector> classes = {
      {"a", {{1, 0}}},  // dist 0 from query
      {"b", {{1, 1}}},  // dist 1
      {"c", {{0, 0}}},  // dist 1
      {"d", {{0, 1}}},  // dist 2
  };
  ClassVector query{{1, 0}};

  SUBCASE("zeta 0: only exact class matches are pseudo-positives") {
    auto v = pmrp(ranked, classes, query, 0);
    REQUIRE(v.has_value());
    CHECK(*v == 0.0);  // R' = 1, top-1 is d
  }
  SUBCASE("zeta 1 widens the pseudo-positive set") {
    auto v = pmrp(ranked, classes, query, 1);
    REQUIRE(v.has_value());
    CHECK(*v == doctest::Approx(2.0 / 3.0).epsilon(1e-12));  // {a,b} in top 3
  }
  SUBCASE("cap truncates R'") {
    auto v = pmrp(ranked, classes, query, 1, 1);
    REQUIRE(v.has_value());
    CHECK(*v == 0.0);  // R' = 1, top-1 is d, not plausible
  }
  SUBCASE("no pseudo-positives means undefined, not zero") {
    ClassVector alien{{0, 0}};
    std::map<ItemId, ClassVector> far_classes = {
        {"d", {{1, 1}}}, {"a", {{1, 1}}}, {"b", {{1, 1}}}, {"c", {{1, 1}}}};
    CHECK_FALSE(pmrp(ranked, far_classes, alien, 0).has_value());
  }
  SUBCASE("gallery item without a class vector") {
    classes.erase("b");
    CHECK_THROWS_AS(pmrp(ranked, classes, query, 0), std::invalid_argument);
  }
  SUBCASE("cap 0 is invalid") {
    CHECK_THROWS_AS(pmrp(ranked, classes, query, 0, 0), std::invalid_argument);
  }
}

TEST_CASE("load_class_vectors parses 0/1 grids") {
  TempDir tmp;
  write_file(tmp.file("cls.csv"),
             "item_id,bit_person,bit_dog,bit_car\n"
             "a,1,0,1\n"
             "b,0,0,0\n");
  auto classes = load_class_vectors(tmp.file("cls.csv"));
  REQUIRE(classes.size() == 2);
  CHECK(classes.at("a").bits == std::vector<std::uint8_t>{1, 0, 1});
  CHECK(classes.at("b").bits == std::vector<std::uint8_t>{0, 0, 0});

  write_file(tmp.file("bad1.csv"), "item_id,b\na,2\n");
  CHECK_THROWS_AS(load_class_vectors(tmp.file("bad1.csv")), ParseError);
  write_file(tmp.file("bad2.csv"), "item_id,b\na,1\na,0\n");
  CHECK_THROWS_AS(load_class_vectors(tmp.file("bad2.csv")), ParseError);
  write_file(tmp.file("bad3.csv"), "wrong,b\na,1\n");
  CHECK_THROWS_AS(load_class_vectors(tmp.file("bad3.csv")), ParseError);
}

TEST_CASE("metric spec parsing") {
  CHECK(parse_metric_spec("recall@1").name() == "recall@1");
  CHECK(parse_metric_spec("recall@10").k == 10);
  CHECK(parse_metric_spec("recall@1:graded").graded);
  CHECK(parse_metric_spec("r_precision").kind == MetricSpec::Kind::RPrecision);
  CHECK(parse_metric_spec("r_precision:graded").name() == "r_precision:graded");
  CHECK(parse_metric_spec("map_at_r").kind == MetricSpec::Kind::MapAtR);
  CHECK(parse_metric_spec("pmrp").kind == MetricSpec::Kind::Pmrp);

  CHECK_THROWS_AS(parse_metric_spec("recall@0"), std::invalid_argument);
  CHECK_THROWS_AS(parse_metric_spec("recall@"), std::invalid_argument);
  CHECK_THROWS_AS(parse_metric_spec("recall@x"), std::invalid_argument);
  CHECK_THROWS_AS(parse_metric_spec("recall@5:graded"), std::invalid_argument);
  CHECK_THROWS_AS(parse_metric_spec("map_at_r:graded"), std::invalid_argument);
  CHECK_THROWS_AS(parse_metric_spec("pmrp:graded"), std::invalid_argument);
  CHECK_THROWS_AS(parse_metric_spec("ndcg"), std::invalid_argument);
  CHECK_THROWS_AS(parse_metric_spec(""), std::invalid_argument);
}

TEST_CASE("metrics match the set-membership oracles on random instances") {
  auto gen = testutil::rng(909);
  std::uniform_int_distribution<int> gallery_size(1, 10), n_pos(1, 6);
  for (int round = 0; round < 300; ++round) {
    int n = gallery_size(gen);
    std::vector<std::string> gallery;
    for (int i = 0; i < n; ++i) gallery.push_back(testutil::item_name("g", i));
    std::shuffle(gallery.begin(), gallery.end(), gen);

    int p = std::min(n_pos(gen), n);
    std::set<std::string> positives;
    std::vector<PositiveAnnotation> annots;
    std::map<std::string, double> credits;
    while (static_cast<int>(positives.size()) < p) {
      std::string id = gallery[std::uniform_int_distribution<int>(0, n - 1)(gen)];
      if (!positives.insert(id).second) continue;
      Judgment j = std::uniform_int_distribution<int>(0, 1)(gen)
                       ? Judgment::Yes
                       : Judgment::WeakYes;
      annots.push_back({id, j, {"s"}});
      credits[id] = credit(j);
    }

    RankedList ranked{"q", gallery};
    auto mv = match_vector(ranked, annots, CreditMode::Binary);
    auto gv = match_vector(ranked, annots, CreditMode::Graded);

    for (std::size_t k = 1; k <= static_cast<std::size_t>(n) + 2; ++k)
      CHECK(recall_at_k(mv, k) == oracle::recall_at_k(gallery, positives, k));
    CHECK(r_precision(mv) ==
          doctest::Approx(oracle::r_precision(gallery, positives)).epsilon(1e-12));
    CHECK(r_precision(gv) ==
          doctest::Approx(oracle::graded_r_precision(gallery, credits)).epsilon(1e-12));
    CHECK(map_at_r(mv) ==
          doctest::Approx(oracle::map_at_r(gallery, positives)).epsilon(1e-12));

    // inequality chain: truncated mAP can never exceed R-Precision
    CHECK(map_at_r(mv) <= r_precision(mv) + 1e-12);
  }
}

TEST_CASE("pmrp matches its oracle on random class assignments") {
  auto gen = testutil::rng(911);
  std::uniform_int_distribution<int> bit(0, 1), zeta_pick(0, 2), cap_pick(1, 5);
  for (int round = 0; round < 300; ++round) {
    int n = std::uniform_int_distribution<int>(1, 10)(gen);
    int dim = std::uniform_int_distribution<int>(1, 4)(gen);
    std::vector<std::string> gallery;
    std::map<ItemId, ClassVector> classes;
    std::map<std::string, std::vector<int>> oracle_classes;
    for (int i = 0; i < n; ++i) {
      std::string id = testutil::item_name("g", i);
      gallery.push_back(id);
      ClassVector v;
      std::vector<int> ov;
      for (int d = 0; d < dim; ++d) {
        int b = bit(gen);
        v.bits.push_back(static_cast<std::uint8_t>(b));
        ov.push_back(b);
      }
      classes.emplace(id, std::move(v));
      oracle_classes.emplace(id, std::move(ov));
    }
    std::shuffle(gallery.begin(), gallery.end(), gen);

    ClassVector query;
    std::vector<int> oracle_query;
    for (int d = 0; d < dim; ++d) {
      int b = bit(gen);
      query.bits.push_back(static_cast<std::uint8_t>(b));
      oracle_query.push_back(b);
    }

    std::size_t zeta = zeta_pick(gen);
    std::size_t cap = cap_pick(gen);
    RankedList ranked{"q", gallery};
    auto got = pmrp(ranked, classes, query, zeta, cap);
    auto want = oracle::pmrp(gallery, oracle_classes, oracle_query, zeta, cap);
    CHECK(got.has_value() == want.has_value());
    if (got && want)
      CHECK(*got == doctest::Approx(*want).epsilon(1e-12));
  }
}

TEST_CASE("recall is monotone in k") {
  auto gen = testutil::rng(912);
  for (int round = 0; round < 100; ++round) {
    int n = std::uniform_int_distribution<int>(2, 10)(gen);
    auto p = place_positives(n, {static_cast<std::size_t>(
                                    std::uniform_int_distribution<int>(1, n)(gen))});
    auto m = binary(p);
    double prev = 0.0;
    for (int k = 1; k <= n; ++k) {
      double cur = recall_at_k(m, k);
      CHECK(cur >= prev);
      prev = cur;
    }
    CHECK(prev == 1.0);  // the positive is somewhere in the gallery
  }
}

TEST_CASE("evaluate_direction aggregates and counts degenerates") {
  // 3 image queries, 4 captions; q3 has no positives at all
  auto sims = testutil::make_matrix(
      {"q1", "q2", "q3"}, {"c1", "c2", "c3", "c4"},
      {0.9, 0.8, 0.1, 0.0,
       0.1, 0.9, 0.8, 0.0,
       0.5, 0.4, 0.3, 0.2},
      Modality::Image);

  GroundTruth gt;
  gt.direction = Modality::Image;
  gt.positives["q1"] = {{"c1", Judgment::Yes, {"s"}}};           // rank 1
  gt.positives["q2"] = {{"c1", Judgment::Yes, {"s"}},
                        {"c3", Judgment::WeakYes, {"s"}}};       // ranks 4 and 2

  EvaluateOptions opts;
  opts.metrics = {parse_metric_spec("recall@1"), parse_metric_spec("r_precision"),
                  parse_metric_spec("recall@1:graded")};

  DirectionReport rep = evaluate_direction(sims, gt, opts);
  CHECK(rep.n_queries == 3);
  CHECK(rep.n_used.at("recall@1") == 2);
  CHECK(rep.n_degenerate.at("recall@1") == 1);

  // q1: recall@1 = 1, rp = 1/1; q2: recall@1 = 0, rp = 1/2 (c3 at rank 2 of top-2)
  CHECK(rep.averaged.at("recall@1") == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(rep.averaged.at("r_precision") == doctest::Approx(0.75).epsilon(1e-12));
  // graded: q1 top-1 credit 1.0; q2 top-1 is c2, credit 0
  CHECK(rep.averaged.at("recall@1:graded") == doctest::Approx(0.5).epsilon(1e-12));

  CHECK(rep.per_query.at("q1").at("recall@1") == 1.0);
  CHECK(rep.per_query.count("q3") == 0);

  SUBCASE("all-degenerate metric is a numeric failure") {
    GroundTruth empty_gt;
    empty_gt.direction = Modality::Image;
    CHECK_THROWS_AS(evaluate_direction(sims, empty_gt, opts), NumericError);
  }
  SUBCASE("direction mismatch") {
    GroundTruth wrong = gt;
    wrong.direction = Modality::Text;
    CHECK_THROWS_AS(evaluate_direction(sims, wrong, opts), std::invalid_argument);
  }
  SUBCASE("duplicate metric") {
    opts.metrics.push_back(parse_metric_spec("recall@1"));
    CHECK_THROWS_AS(evaluate_direction(sims, gt, opts), std::invalid_argument);
  }
  SUBCASE("pmrp requires class vectors") {
    opts.metrics = {parse_metric_spec("pmrp")};
    CHECK_THROWS_AS(evaluate_direction(sims, gt, opts), std::invalid_argument);
  }
}

TEST_CASE("bidirectional average is the mean of both directions") {
  auto i2t = testutil::make_matrix({"i1"}, {"c1", "c2"}, {0.9, 0.1}, Modality::Image);
  auto t2i = testutil::make_matrix({"c1"}, {"i1", "i2"}, {0.1, 0.9}, Modality::Text);

  GroundTruth gt_i2t, gt_t2i;
  gt_i2t.direction = Modality::Image;
  gt_i2t.positives["i1"] = {{"c1", Judgment::Yes, {"s"}}};  // hit at rank 1
  gt_t2i.direction = Modality::Text;
  gt_t2i.positives["c1"] = {{"i1", Judgment::Yes, {"s"}}};  // hit at rank 2

  EvaluateOptions opts;
  opts.metrics = {parse_metric_spec("recall@1")};
  EvaluationReport rep = evaluate(i2t, t2i, gt_i2t, gt_t2i, opts);
  CHECK(rep.image_to_text.averaged.at("recall@1") == 1.0);
  CHECK(rep.text_to_image.averaged.at("recall@1") == 0.0);
  CHECK(rep.bidirectional.at("recall@1") == doctest::Approx(0.5).epsilon(1e-12));

  SUBCASE("swapped directions are rejected") {
    CHECK_THROWS_AS(evaluate(t2i, i2t, gt_t2i, gt_i2t, opts),
                    std::invalid_argument);
  }
}
