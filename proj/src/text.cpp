#include "fnd/text.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include "fnd/errors.hpp"

namespace fnd {

namespace {

bool is_ascii_punct(unsigned char c) {
  return (c >= 33 && c <= 47) || (c >= 58 && c <= 64) || (c >= 91 && c <= 96) || (c >= 123 && c <= 126);
}

bool is_unicode_space(char32_t cp) {
  return (cp >= 0x09 && cp <= 0x0D) || cp == 0x20 || cp == 0x85 || cp == 0xA0 || cp == 0x1680 ||
         (cp >= 0x2000 && cp <= 0x200A) || cp == 0x2028 || cp == 0x2029 || cp == 0x202F ||
         cp == 0x205F || cp == 0x3000;
}

// Decodes one UTF-8 sequence at `pos`. Returns the number of bytes consumed
// and writes the code point; invalid sequences consume one byte and yield an
// out-of-range code point so they are never treated as whitespace.
std::size_t decode_utf8(std::string_view s, std::size_t pos, char32_t& cp) {
  const auto b0 = static_cast<unsigned char>(s[pos]);
  constexpr char32_t kInvalid = 0x110000;
  if (b0 < 0x80) {
    cp = b0;
    return 1;
  }
  std::size_t len = 0;
  char32_t value = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    value = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    value = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    value = b0 & 0x07;
  } else {
    cp = kInvalid;
    return 1;
  }
  if (pos + len > s.size()) {
    cp = kInvalid;
    return 1;
  }
  for (std::size_t i = 1; i < len; ++i) {
    const auto b = static_cast<unsigned char>(s[pos + i]);
    if ((b & 0xC0) != 0x80) {
      cp = kInvalid;
      return 1;
    }
    value = (value << 6) | (b & 0x3F);
  }
  cp = value;
  return len;
}

std::string_view strip_punct(std::string_view t) {
  while (!t.empty() && is_ascii_punct(static_cast<unsigned char>(t.front()))) t.remove_prefix(1);
  while (!t.empty() && is_ascii_punct(static_cast<unsigned char>(t.back()))) t.remove_suffix(1);
  return t;
}

void emit_token(std::string raw, TokenList& out) {
  for (auto& c : raw) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  std::string_view t = raw;
  // Leading punctuation other than '@' is noise in front of a URL or mention.
  while (!t.empty() && t.front() != '@' && is_ascii_punct(static_cast<unsigned char>(t.front()))) {
    t.remove_prefix(1);
  }
  if (t.starts_with("http://") || t.starts_with("https://") || t.starts_with("www.")) {
    out.emplace_back(kUrlToken);
    return;
  }
  if (t.starts_with('@') && !strip_punct(t).empty()) {
    out.emplace_back(kUserToken);
    return;
  }
  t = strip_punct(t);
  if (!t.empty()) out.emplace_back(t);
}

}  // namespace

TokenList tokenize(std::string_view text) {
  TokenList tokens;
  std::string current;
  std::size_t pos = 0;
  while (pos < text.size()) {
    char32_t cp = 0;
    const std::size_t len = decode_utf8(text, pos, cp);
    if (is_unicode_space(cp)) {
      if (!current.empty()) emit_token(std::move(current), tokens);
      current.clear();
    } else {
      current.append(text.substr(pos, len));
    }
    pos += len;
  }
  if (!current.empty()) emit_token(std::move(current), tokens);
  return tokens;
}

// ---- Vocabulary -----------------------------------------------------------

Vocabulary Vocabulary::build(const std::vector<TokenList>& corpus, VocabularyOptions options) {
  if (options.max_size < 3) {
    throw ConfigError("vocabulary max_size must be at least 3, got " + std::to_string(options.max_size));
  }
  std::map<std::string, std::size_t> counts;
  for (const auto& doc : corpus) {
    for (const auto& tok : doc) ++counts[tok];
  }
  std::vector<std::pair<std::string, std::size_t>> ranked;
  for (auto& [tok, n] : counts) {
    if (tok == kPadToken || tok == kUnknownToken) continue;
    if (n >= options.min_frequency) ranked.emplace_back(tok, n);
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  if (ranked.size() > options.max_size - 2) ranked.resize(options.max_size - 2);

  Vocabulary vocab;
  for (auto& [tok, n] : ranked) vocab.add(tok);
  return vocab;
}

void Vocabulary::add(std::string token) {
  const auto id = static_cast<std::int32_t>(tokens_.size() + 2);
  index_.emplace(token, id);
  tokens_.push_back(std::move(token));
}

std::int32_t Vocabulary::id(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnknownId : it->second;
}

bool Vocabulary::contains(std::string_view token) const { return index_.count(std::string(token)) > 0; }

std::string_view Vocabulary::token(std::int32_t id) const {
  if (id == kPadId) return kPadToken;
  if (id == kUnknownId) return kUnknownToken;
  if (id < 0 || static_cast<std::size_t>(id) >= size()) {
    throw LookupError("vocabulary: no token with id " + std::to_string(id));
  }
  return tokens_[static_cast<std::size_t>(id) - 2];
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write vocabulary to " + path.string());
  out << kPadToken << '\t' << kPadId << '\n' << kUnknownToken << '\t' << kUnknownId << '\n';
  for (std::size_t i = 0; i < tokens_.size(); ++i) out << tokens_[i] << '\t' << (i + 2) << '\n';
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read vocabulary from " + path.string());
  Vocabulary vocab;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError("vocabulary entry without a tab", line_no);
    const std::string token = line.substr(0, tab);
    long index = 0;
    try {
      index = std::stol(line.substr(tab + 1));
    } catch (const std::exception&) {
      throw ParseError("vocabulary index is not an integer", line_no);
    }
    if (index == kPadId || index == kUnknownId) continue;
    if (index != static_cast<long>(vocab.size())) throw ParseError("vocabulary indices are not contiguous", line_no);
    vocab.add(token);
  }
  return vocab;
}

TokenSequence encode_pad(const TokenList& tokens, const Vocabulary& vocab, std::size_t max_seq_len) {
  if (max_seq_len == 0) throw ConfigError("max_seq_len must be at least 1");
  TokenSequence seq;
  seq.true_length = std::min(tokens.size(), max_seq_len);
  seq.ids.assign(max_seq_len, kPadId);
  for (std::size_t i = 0; i < seq.true_length; ++i) seq.ids[i] = vocab.id(tokens[i]);
  return seq;
}

}  // namespace fnd
