#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>

namespace fnd {

// Class proportions for one text. Components sum to 1.
struct SentimentScore {
  double negative = 0.0;
  double neutral = 1.0;
  double positive = 0.0;

  bool operator==(const SentimentScore&) const = default;
};

enum class TextField { news, tweet };

// Order: news (neg, neu, pos), tweet (neg, neu, pos).
using SentimentFeatures = std::array<double, 6>;

class SentimentEncoder {
 public:
  virtual ~SentimentEncoder() = default;

  // `record_id` and `field` identify the text for encoders that look scores
  // up instead of computing them; text-based encoders ignore them.
  virtual SentimentScore score_text(std::string_view record_id, TextField field, std::string_view text) const = 0;

  virtual std::string name() const = 0;
};

// Token-count proportions against positive and negative word lists.
class LexiconEncoder final : public SentimentEncoder {
 public:
  LexiconEncoder(std::unordered_set<std::string> positive, std::unordered_set<std::string> negative);

  // Reads positive-words.txt and negative-words.txt from `dir`
  // (one word per line, '#' comments).
  static LexiconEncoder from_directory(const std::filesystem::path& dir);
  // The lexicon shipped in data/lexicon.
  static LexiconEncoder bundled();

  SentimentScore score_text(std::string_view record_id, TextField field, std::string_view text) const override;
  SentimentScore score(std::string_view text) const;
  std::string name() const override { return "lexicon"; }

  bool is_positive(const std::string& word) const { return positive_.count(word) > 0; }
  bool is_negative(const std::string& word) const { return negative_.count(word) > 0; }

 private:
  std::unordered_set<std::string> positive_;
  std::unordered_set<std::string> negative_;
};

// Scores produced offline by an external model, read from a CSV sidecar with
// header `record_id,news_neg,news_neu,news_pos,tweet_neg,tweet_neu,tweet_pos`.
class PrecomputedEncoder final : public SentimentEncoder {
 public:
  static PrecomputedEncoder from_csv(const std::filesystem::path& path);

  SentimentScore score_text(std::string_view record_id, TextField field, std::string_view text) const override;
  std::string name() const override { return "precomputed"; }
  std::size_t size() const noexcept { return scores_.size(); }

 private:
  std::unordered_map<std::string, std::array<SentimentScore, 2>> scores_;
};

SentimentFeatures encode_record(const SentimentEncoder& encoder, std::string_view record_id,
                                std::string_view news_text, std::string_view tweet_text);

std::filesystem::path bundled_data_dir();

}  // namespace fnd
