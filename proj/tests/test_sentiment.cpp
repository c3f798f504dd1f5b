#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "fnd/errors.hpp"
#include "fnd/rng.hpp"
#include "fnd/sentiment.hpp"

using namespace fnd;
namespace fs = std::filesystem;

namespace {

double triple_sum(const SentimentScore& s) { return s.negative + s.neutral + s.positive; }

LexiconEncoder tiny_lexicon() { return LexiconEncoder({"good", "great", "love"}, {"bad", "scam", "hate"}); }

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / "fnd_test_sentiment";
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("lexicon scoring") {
  const auto enc = tiny_lexicon();
  CHECK(enc.score("") == SentimentScore{0.0, 1.0, 0.0});
  CHECK(enc.score("   ") == SentimentScore{0.0, 1.0, 0.0});

  const auto s = enc.score("good great day today");
  CHECK(s.negative == doctest::Approx(0.0));
  CHECK(s.neutral == doctest::Approx(0.5));
  CHECK(s.positive == doctest::Approx(0.5));

  const auto mixed = enc.score("Bad, GOOD! scam");
  CHECK(mixed.negative == doctest::Approx(2.0 / 3.0));
  CHECK(mixed.positive == doctest::Approx(1.0 / 3.0));
  CHECK(mixed.neutral == doctest::Approx(0.0));
}

TEST_CASE("bundled lexicon scores an all-negative phrase as fully negative") {
  const auto enc = LexiconEncoder::bundled();
  REQUIRE(enc.is_negative("terrible"));
  REQUIRE(enc.is_negative("awful"));
  REQUIRE(enc.is_negative("scam"));
  const auto s = enc.score("terrible awful scam");
  CHECK(s.negative == doctest::Approx(1.0));
  CHECK(s.neutral == doctest::Approx(0.0));
  CHECK(s.positive == doctest::Approx(0.0));
}

TEST_CASE("encode_record concatenates news then tweet") {
  const auto enc = tiny_lexicon();
  const auto empty = encode_record(enc, "r", "", "");
  CHECK(empty == SentimentFeatures{0, 1, 0, 0, 1, 0});

  const auto same = encode_record(enc, "r", "love the scam", "love the scam");
  for (int i = 0; i < 3; ++i) CHECK(same[i] == same[i + 3]);

  const std::string news = "I hate this bad thing";
  const std::string tweet = "great great news";
  const auto f = encode_record(enc, "r", news, tweet);
  const auto n = enc.score(news);
  const auto t = enc.score(tweet);
  CHECK(f == SentimentFeatures{n.negative, n.neutral, n.positive, t.negative, t.neutral, t.positive});
}

TEST_CASE("lexicon triples sum to one and scoring is pure") {
  const auto enc = LexiconEncoder::bundled();
  const std::vector<std::string> words = {"good", "bad", "scam", "the", "awful", "love", "!!", "@x", "news", "ok"};
  Rng rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    std::string text;
    const auto n = rng.below(15);
    for (std::size_t i = 0; i < n; ++i) text += words[rng.below(words.size())] + " ";
    const auto s = enc.score(text);
    CHECK(std::abs(triple_sum(s) - 1.0) < 1e-6);
    CHECK(s.negative >= 0.0);
    CHECK(s.neutral >= 0.0);
    CHECK(s.positive >= 0.0);
    CHECK(enc.score(text) == s);
    CHECK(encode_record(enc, "id", text, text).size() == 6);
  }
}

TEST_CASE("precomputed sidecar") {
  const auto dir = scratch_dir();
  const auto path = dir / "scores.csv";
  std::ofstream(path) << "record_id,news_neg,news_neu,news_pos,tweet_neg,tweet_neu,tweet_pos\n"
                         "a,0.1,0.2,0.7,0.5,0.5,0\n"
                         "b,1,0,0,0.25,0.25,0.5\n";
  const auto enc = PrecomputedEncoder::from_csv(path);
  CHECK(enc.size() == 2);
  CHECK(enc.score_text("a", TextField::news, "ignored") == SentimentScore{0.1, 0.2, 0.7});
  CHECK(enc.score_text("a", TextField::tweet, "") == SentimentScore{0.5, 0.5, 0.0});
  CHECK(encode_record(enc, "b", "x", "y") == SentimentFeatures{1, 0, 0, 0.25, 0.25, 0.5});

  try {
    (void)enc.score_text("missing-42", TextField::news, "");
    FAIL("expected a lookup error");
  } catch (const LookupError& e) {
    CHECK(std::string(e.what()).find("missing-42") != std::string::npos);
  }
  CHECK_THROWS_AS(encode_record(enc, "nope", "", ""), LookupError);
  fs::remove_all(dir);
}

TEST_CASE("malformed sidecars are rejected with a line number") {
  const auto dir = scratch_dir();
  const std::string header = "record_id,news_neg,news_neu,news_pos,tweet_neg,tweet_neu,tweet_pos\n";
  auto expect_line = [&](const std::string& body, std::size_t line) {
    std::ofstream(dir / "bad.csv") << body;
    try {
      (void)PrecomputedEncoder::from_csv(dir / "bad.csv");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == line);
    }
  };
  expect_line("id,a,b,c,d,e,f\n", 1);
  expect_line(header + "a,0.1,0.2,0.7,0.5,0.5,0\nb,0.1,0.2\n", 3);
  expect_line(header + "a,0.1,0.2,0.3,0.5,0.5,0\n", 2);
  expect_line(header + "a,x,0.2,0.8,0.5,0.5,0\n", 2);
  expect_line(header + "a,1,0,0,1,0,0\na,1,0,0,1,0,0\n", 3);
  fs::remove_all(dir);
}
