#include <doctest.h>

#include <random>

#include "xmeval/error.hpp"
#include "xmeval/ranking.hpp"

#include "helpers.hpp"
#include "oracles.hpp"

using namespace xmeval;
using testutil::TempDir;
using testutil::make_matrix;
using testutil::write_file;

TEST_CASE("rank_gallery orders by score, ties by id") {
  auto m = make_matrix({"q1"}, {"b", "a", "c", "d"}, {0.5, 0.5, 0.9, 0.1});
  RankedList r = rank_gallery(m, "q1");
  CHECK(r.query == "q1");
  CHECK(r.candidates == std::vector<ItemId>{"c", "a", "b", "d"});

  CHECK(topk(r, 2) == std::vector<ItemId>{"c", "a"});
  CHECK(topk(r, 0).empty());
  CHECK(topk(r, 99) == r.candidates);

  CHECK_THROWS_AS(rank_gallery(m, "no_such_query"), std::invalid_argument);
}

TEST_CASE("rank_gallery matches the pair-sort oracle on random matrices") {
  auto gen = testutil::rng(310);
  // scores drawn from a tiny grid so ties are common
  std::uniform_int_distribution<int> grid(0, 4);
  for (int round = 0; round < 200; ++round) {
    std::size_t n = std::uniform_int_distribution<std::size_t>(1, 12)(gen);
    std::vector<std::string> gallery;
    std::vector<double> scores;
    for (std::size_t i = 0; i < n; ++i) {
      gallery.push_back(testutil::item_name("g", i));
      scores.push_back(grid(gen) / 4.0);
    }
    // shuffle the gallery so input order is not the tie order
    std::shuffle(gallery.begin(), gallery.end(), gen);
    auto m = make_matrix({"q"}, gallery, scores);
    CHECK(rank_gallery(m, "q").candidates == oracle::rank(gallery, scores));
  }
}

TEST_CASE("validate rejects malformed matrices") {
  SimilarityMatrix m;
  m.queries = {"q1"};
  m.gallery = {"g1", "g2"};

  SUBCASE("shape mismatch") {
    m.scores = {1.0};
    CHECK_THROWS_AS(m.validate(), ParseError);
  }
  SUBCASE("NaN score") {
    m.scores = {1.0, std::nan("")};
    CHECK_THROWS_AS(m.validate(), ParseError);
  }
  SUBCASE("duplicate gallery id") {
    m.gallery = {"g1", "g1"};
    m.scores = {1.0, 2.0};
    CHECK_THROWS_AS(m.validate(), ParseError);
  }
  SUBCASE("duplicate query id") {
    m.queries = {"q1", "q1"};
    m.scores = {1.0, 2.0, 3.0, 4.0};
    CHECK_THROWS_AS(m.validate(), ParseError);
  }
  SUBCASE("empty gallery") {
    m.gallery = {};
    m.scores = {};
    CHECK_THROWS_AS(m.validate(), ParseError);
  }
}

TEST_CASE("dense CSV round trip") {
  TempDir tmp;
  write_file(tmp.file("sims.csv"),
             "query,g1,g2,g3\n"
             "q1,0.9,0.1,0.5\n"
             "q2,0.2,0.8,0.3\n");
  SimilarityMatrix m = load_similarity_csv(tmp.file("sims.csv"), Modality::Image);
  CHECK(m.queries == std::vector<ItemId>{"q1", "q2"});
  CHECK(m.gallery == std::vector<ItemId>{"g1", "g2", "g3"});
  CHECK(m.at(0, 0) == 0.9);
  CHECK(m.at(1, 2) == 0.3);
  CHECK(m.query_modality == Modality::Image);
  CHECK(rank_gallery(m, "q2").candidates == std::vector<ItemId>{"g2", "g3", "g1"});

  SUBCASE("corner label content is irrelevant") {
    write_file(tmp.file("sims2.csv"),
               "whatever_text_here,g1,g2,g3\n"
               "q1,0.9,0.1,0.5\n"
               "q2,0.2,0.8,0.3\n");
    SimilarityMatrix m2 = load_similarity_csv(tmp.file("sims2.csv"), Modality::Image);
    CHECK(m2.gallery == m.gallery);
    CHECK(m2.scores == m.scores);
  }
}

TEST_CASE("dense CSV errors carry the file and line") {
  TempDir tmp;

  SUBCASE("short row") {
    write_file(tmp.file("bad.csv"), "q,g1,g2\nq1,0.5\n");
    try {
      load_similarity_csv(tmp.file("bad.csv"), Modality::Image);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      std::string msg = e.what();
      CHECK(msg.find("bad.csv") != std::string::npos);
      CHECK(msg.find(":2") != std::string::npos);
    }
  }
  SUBCASE("non-numeric score") {
    write_file(tmp.file("bad.csv"), "q,g1\nq1,hello\n");
    CHECK_THROWS_AS(load_similarity_csv(tmp.file("bad.csv"), Modality::Image),
                    ParseError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_similarity_csv(tmp.file("nope.csv"), Modality::Image),
                    ParseError);
  }
  SUBCASE("no data rows") {
    write_file(tmp.file("bad.csv"), "q,g1\n");
    CHECK_THROWS_AS(load_similarity_csv(tmp.file("bad.csv"), Modality::Image),
                    ParseError);
  }
}

TEST_CASE("sparse TSV requires the full cross product") {
  TempDir tmp;
  write_file(tmp.file("sims.tsv"),
             "q1\tg1\t0.9\n"
             "q1\tg2\t0.1\n"
             "q2\tg1\t0.2\n"
             "q2\tg2\t0.8\n");
  SimilarityMatrix m = load_similarity_tsv(tmp.file("sims.tsv"), Modality::Text);
  CHECK(m.queries == std::vector<ItemId>{"q1", "q2"});
  CHECK(m.gallery == std::vector<ItemId>{"g1", "g2"});
  CHECK(m.at(0, 0) == 0.9);
  CHECK(m.at(1, 1) == 0.8);

  SUBCASE("row order does not matter") {
    write_file(tmp.file("shuffled.tsv"),
               "q2\tg2\t0.8\n"
               "q1\tg2\t0.1\n"
               "q2\tg1\t0.2\n"
               "q1\tg1\t0.9\n");
    SimilarityMatrix m2 = load_similarity_tsv(tmp.file("shuffled.tsv"), Modality::Text);
    CHECK(m2.queries == m.queries);
    CHECK(m2.gallery == m.gallery);
    CHECK(m2.scores == m.scores);
  }

  SUBCASE("missing cell") {
    write_file(tmp.file("gap.tsv"),
               "q1\tg1\t0.9\n"
               "q1\tg2\t0.1\n"
               "q2\tg1\t0.2\n");
    CHECK_THROWS_AS(load_similarity_tsv(tmp.file("gap.tsv"), Modality::Text),
                    ParseError);
  }
  SUBCASE("duplicate cell") {
    write_file(tmp.file("dup.tsv"),
               "q1\tg1\t0.9\n"
               "q1\tg1\t0.8\n");
    CHECK_THROWS_AS(load_similarity_tsv(tmp.file("dup.tsv"), Modality::Text),
                    ParseError);
  }
  SUBCASE("wrong column count") {
    write_file(tmp.file("cols.tsv"), "q1\tg1\n");
    CHECK_THROWS_AS(load_similarity_tsv(tmp.file("cols.tsv"), Modality::Text),
                    ParseError);
  }
}

TEST_CASE("rank_all covers every query") {
  auto m = make_matrix({"q1", "q2"}, {"a", "b"}, {0.1, 0.9, 0.9, 0.1});
  auto all = rank_all(m);
  REQUIRE(all.size() == 2);
  CHECK(all.at("q1").candidates == std::vector<ItemId>{"b", "a"});
  CHECK(all.at("q2").candidates == std::vector<ItemId>{"a", "b"});
}

TEST_CASE("ranking is invariant under monotone score transforms") {
  auto gen = testutil::rng(311);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int round = 0; round < 50; ++round) {
    std::vector<std::string> gallery;
    std::vector<double> scores;
    for (std::size_t i = 0; i < 9; ++i) {
      gallery.push_back(testutil::item_name("g", i));
      scores.push_back(u(gen));
    }
    std::vector<double> transformed;
    for (double s : scores) transformed.push_back(3.0 * s + 11.0);

    auto a = rank_gallery(make_matrix({"q"}, gallery, scores), "q");
    auto b = rank_gallery(make_matrix({"q"}, gallery, transformed), "q");
    CHECK(a.candidates == b.candidates);
  }
}
