#include "fnd/sentiment.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>

#include "fnd/csv.hpp"
#include "fnd/errors.hpp"
#include "fnd/text.hpp"

#ifndef FND_DATA_DIR
#define FND_DATA_DIR "data"
#endif

namespace fnd {

namespace {

std::unordered_set<std::string> read_word_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read word list " + path.string());
  std::unordered_set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    words.insert(line);
  }
  return words;
}

double parse_probability(const std::string& field, std::size_t line) {
  char* end = nullptr;
  const double v = std::strtod(field.c_str(), &end);
  if (field.empty() || end != field.c_str() + field.size() || !std::isfinite(v) || v < 0.0 || v > 1.0) {
    throw ParseError("sentiment value '" + field + "' is not a number in [0, 1]", line);
  }
  return v;
}

}  // namespace

std::filesystem::path bundled_data_dir() {
  if (const char* env = std::getenv("FND_DATA_DIR"); env != nullptr && *env != '\0') return env;
  return FND_DATA_DIR;
}

LexiconEncoder::LexiconEncoder(std::unordered_set<std::string> positive, std::unordered_set<std::string> negative)
    : positive_(std::move(positive)), negative_(std::move(negative)) {}

LexiconEncoder LexiconEncoder::from_directory(const std::filesystem::path& dir) {
  return LexiconEncoder(read_word_list(dir / "positive-words.txt"), read_word_list(dir / "negative-words.txt"));
}

LexiconEncoder LexiconEncoder::bundled() { return from_directory(bundled_data_dir() / "lexicon"); }

SentimentScore LexiconEncoder::score(std::string_view text) const {
  const TokenList tokens = tokenize(text);
  if (tokens.empty()) return {0.0, 1.0, 0.0};
  std::size_t pos = 0;
  std::size_t neg = 0;
  for (const auto& t : tokens) {
    if (positive_.count(t)) {
      ++pos;
    } else if (negative_.count(t)) {
      ++neg;
    }
  }
  const auto total = static_cast<double>(tokens.size());
  const auto neutral = tokens.size() - pos - neg;
  return {static_cast<double>(neg) / total, static_cast<double>(neutral) / total, static_cast<double>(pos) / total};
}

SentimentScore LexiconEncoder::score_text(std::string_view, TextField, std::string_view text) const {
  return score(text);
}

PrecomputedEncoder PrecomputedEncoder::from_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read sentiment sidecar " + path.string());
  CsvReader reader(in);
  const auto header = reader.next();
  static const std::vector<std::string> kHeader = {"record_id", "news_neg", "news_neu", "news_pos",
                                                   "tweet_neg", "tweet_neu", "tweet_pos"};
  if (!header || header->fields != kHeader) {
    throw ParseError("sidecar header must be record_id,news_neg,news_neu,news_pos,tweet_neg,tweet_neu,tweet_pos", 1);
  }
  PrecomputedEncoder enc;
  while (auto row = reader.next()) {
    if (row->fields.size() == 1 && row->fields[0].empty()) continue;
    if (row->fields.size() != kHeader.size()) {
      throw ParseError("expected 7 fields, got " + std::to_string(row->fields.size()), row->line);
    }
    std::array<SentimentScore, 2> pair;
    for (std::size_t s = 0; s < 2; ++s) {
      SentimentScore score{parse_probability(row->fields[1 + 3 * s], row->line),
                           parse_probability(row->fields[2 + 3 * s], row->line),
                           parse_probability(row->fields[3 + 3 * s], row->line)};
      if (std::abs(score.negative + score.neutral + score.positive - 1.0) > 1e-6) {
        throw ParseError("sentiment triple does not sum to 1", row->line);
      }
      pair[s] = score;
    }
    if (!enc.scores_.emplace(row->fields[0], pair).second) {
      throw ParseError("duplicate record id '" + row->fields[0] + "'", row->line);
    }
  }
  return enc;
}

SentimentScore PrecomputedEncoder::score_text(std::string_view record_id, TextField field, std::string_view) const {
  auto it = scores_.find(std::string(record_id));
  if (it == scores_.end()) {
    throw LookupError("no precomputed sentiment for record id '" + std::string(record_id) + "'");
  }
  return it->second[field == TextField::news ? 0 : 1];
}

SentimentFeatures encode_record(const SentimentEncoder& encoder, std::string_view record_id,
                                std::string_view news_text, std::string_view tweet_text) {
  const SentimentScore news = encoder.score_text(record_id, TextField::news, news_text);
  const SentimentScore tweet = encoder.score_text(record_id, TextField::tweet, tweet_text);
  return {news.negative, news.neutral, news.positive, tweet.negative, tweet.neutral, tweet.positive};
}

}  // namespace fnd
