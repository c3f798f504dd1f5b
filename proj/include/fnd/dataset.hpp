#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "fnd/features.hpp"
#include "fnd/sentiment.hpp"
#include "fnd/text.hpp"

namespace fnd {

enum class Label : std::int8_t { unlabeled = -1, real = 0, fake = 1 };

struct NewsRecord {
  std::string id;
  std::string title;
  std::string news_text;
  std::string source;
  std::string tweet_text;
  std::vector<std::string> reply_texts;
  std::optional<std::chrono::sys_days> news_date;
  std::optional<std::chrono::sys_days> tweet_date;
  std::optional<std::chrono::sys_days> user_registration_date;
  std::optional<std::uint64_t> retweet_count;
  std::optional<std::uint64_t> user_tweet_count;
  std::optional<std::uint64_t> follower_count;
  std::optional<std::uint64_t> following_count;
  std::optional<std::uint64_t> like_count;
  std::optional<std::string> post_device;
  Label label = Label::unlabeled;

  bool labeled() const noexcept { return label != Label::unlabeled; }
};

enum class CorpusFormat { jsonl, csv };

CorpusFormat parse_corpus_format(const std::string& name);
// Format implied by the file extension (.csv -> csv, anything else -> jsonl).
CorpusFormat guess_corpus_format(const std::filesystem::path& path);

// One record per JSONL line or CSV row. Missing optional fields become null,
// a missing label leaves the record unlabeled. Throws ParseError naming the
// line for malformed input and for duplicate ids.
std::vector<NewsRecord> load_records(const std::filesystem::path& path, CorpusFormat format);
void write_jsonl(const std::filesystem::path& path, std::span<const NewsRecord> records);

std::optional<std::chrono::sys_days> parse_date(const std::string& text);
std::string format_date(std::chrono::sys_days day);

// ---- splits and folds -----------------------------------------------------

enum class SplitPart { train, validation, test };
const char* split_part_name(SplitPart part);

struct SplitRatios {
  double train = 0.6;
  double validation = 0.2;
  double test = 0.2;
};

struct DatasetSplit {
  std::vector<std::string> train;
  std::vector<std::string> validation;
  std::vector<std::string> test;

  std::optional<SplitPart> part_of(const std::string& id) const;

 private:
  friend DatasetSplit make_split(std::vector<std::string>, std::vector<std::string>, std::vector<std::string>);
  std::unordered_map<std::string, SplitPart> membership_;
};

DatasetSplit make_split(std::vector<std::string> train, std::vector<std::string> validation,
                        std::vector<std::string> test);

// Seeded, stratified split. Validation and test are drawn from labeled records
// only, with each class represented in proportion to the labeled pool;
// unlabeled records always land in train.
DatasetSplit split(std::span<const NewsRecord> records, SplitRatios ratios, std::uint64_t seed);

struct FoldPlan {
  std::size_t k = 0;
  std::uint64_t seed = 0;
  std::vector<std::vector<std::string>> folds;
  // Fold-1 records whose true labels are exposed to training.
  std::unordered_set<std::string> labeled;

  bool exposes_label(const std::string& id) const { return labeled.count(id) > 0; }
};

// Fold 1 is filled from the labeled train records; the remaining train
// records are spread over folds 2..k with labels hidden. Fold sizes differ by
// at most one, with the remainder going to the earliest folds.
FoldPlan make_folds(std::span<const NewsRecord> records, const DatasetSplit& split, std::size_t k,
                    std::uint64_t seed);

// Throws LeakageError when a fold holds a validation/test id and
// ContractError when the folds do not partition the train split.
void check_no_leakage(const FoldPlan& plan, const DatasetSplit& split);

void save_fold_plan(const std::filesystem::path& path, const FoldPlan& plan);
FoldPlan load_fold_plan(const std::filesystem::path& path);

// Order-independent 64-bit fingerprint of a set of ids.
std::uint64_t fingerprint_ids(std::span<const std::string> ids);

// ---- features -------------------------------------------------------------

inline constexpr std::size_t kNumericColumns = 5;
inline constexpr std::size_t kDateColumns = 2;
inline constexpr std::size_t kSentimentColumns = 6;
inline constexpr std::size_t kAuxWidth = kNumericColumns + kDateColumns + kSentimentColumns;
inline constexpr double kDateScale = 1.0 / 10000.0;

// retweet_count, user_tweet_count, follower_count, following_count, like_count
std::array<std::optional<double>, kNumericColumns> numeric_columns(const NewsRecord& record);

struct NormalizationStats {
  std::array<double, kNumericColumns> median{};
  std::array<double, kNumericColumns> mean{};
  std::array<double, kNumericColumns> stddev{};
  std::uint64_t train_fingerprint = 0;
};

// Medians over non-null train values; mean/std (population) over the train
// values after median imputation. Every record must belong to the train split.
NormalizationStats compute_stats(std::span<const NewsRecord> train_records, const DatasetSplit& split);

// Builds the vocabulary from news and tweet text of train-split records.
Vocabulary build_vocabulary(std::span<const NewsRecord> records, const DatasetSplit& split,
                            VocabularyOptions options = {});

class FeatureAssembler {
 public:
  // Throws ContractError if `stats` were not computed on `split.train`.
  FeatureAssembler(const Vocabulary& vocab, const SentimentEncoder& encoder, const NormalizationStats& stats,
                   const DatasetSplit& split, std::size_t max_seq_len);

  FeatureVector assemble(const NewsRecord& record) const;

 private:
  const Vocabulary& vocab_;
  const SentimentEncoder& encoder_;
  NormalizationStats stats_;
  std::size_t max_seq_len_;
};

FeatureVector assemble_features(const NewsRecord& record, const Vocabulary& vocab, const SentimentEncoder& encoder,
                                const NormalizationStats& stats, const DatasetSplit& split,
                                std::size_t max_seq_len);

// Assembled inputs for a whole corpus, addressable by id.
struct AssembledCorpus {
  std::vector<std::string> ids;
  std::vector<FeatureVector> features;
  std::vector<Label> labels;

  std::size_t index_of(const std::string& id) const;
  const FeatureVector& features_of(const std::string& id) const { return features[index_of(id)]; }
  Label label_of(const std::string& id) const { return labels[index_of(id)]; }

  std::unordered_map<std::string, std::size_t> index;
};

AssembledCorpus assemble_corpus(std::span<const NewsRecord> records, const FeatureAssembler& assembler);

}  // namespace fnd
