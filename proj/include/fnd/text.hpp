#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace fnd {

using TokenList = std::vector<std::string>;

inline constexpr std::int32_t kPadId = 0;
inline constexpr std::int32_t kUnknownId = 1;
inline constexpr std::string_view kPadToken = "<pad>";
inline constexpr std::string_view kUnknownToken = "<unk>";
inline constexpr std::string_view kUrlToken = "<url>";
inline constexpr std::string_view kUserToken = "<user>";

// Lowercases ASCII letters, splits on Unicode whitespace, collapses URLs and
// @mentions, strips leading/trailing ASCII punctuation and drops empty tokens.
// Bytes that are not valid UTF-8 are kept verbatim.
TokenList tokenize(std::string_view text);

struct VocabularyOptions {
  std::size_t min_frequency = 2;
  std::size_t max_size = 20000;
};

// token -> id map. Ids 0 and 1 are reserved for padding and unknown tokens;
// real tokens get contiguous ids from 2.
class Vocabulary {
 public:
  Vocabulary() = default;

  static Vocabulary build(const std::vector<TokenList>& corpus, VocabularyOptions options = {});

  std::size_t size() const noexcept { return tokens_.size() + 2; }
  std::int32_t id(std::string_view token) const;  // kUnknownId when absent
  bool contains(std::string_view token) const;
  // Token for an id >= 2, or the reserved names for 0 and 1.
  std::string_view token(std::int32_t id) const;

  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

  // Two tab-separated columns (token, index), one entry per line, UTF-8.
  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);

  bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_; }

 private:
  void add(std::string token);

  std::vector<std::string> tokens_;  // tokens_[i] has id i + 2
  std::unordered_map<std::string, std::int32_t> index_;
};

struct TokenSequence {
  std::vector<std::int32_t> ids;  // exactly max_seq_len entries
  std::size_t true_length = 0;
};

// Known tokens map to their id, unknown to kUnknownId. Keeps the prefix when
// truncating and right-pads with kPadId.
TokenSequence encode_pad(const TokenList& tokens, const Vocabulary& vocab, std::size_t max_seq_len);

}  // namespace fnd
