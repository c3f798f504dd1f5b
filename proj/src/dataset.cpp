#include "fnd/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>

#include <json.hpp>

#include "fnd/csv.hpp"
#include "fnd/errors.hpp"
#include "fnd/parallel.hpp"
#include "fnd/rng.hpp"

namespace fnd {

using nlohmann::json;
using namespace std::chrono;

namespace {

constexpr sys_days kEpoch2000 = sys_days{year{2000} / January / 1};

Label parse_label_value(const json& v, std::size_t line) {
  if (v.is_null()) return Label::unlabeled;
  if (v.is_number_integer() || v.is_number_unsigned()) {
    const auto n = v.get<long long>();
    if (n == 0) return Label::real;
    if (n == 1) return Label::fake;
  }
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "0" || s == "real") return Label::real;
    if (s == "1" || s == "fake") return Label::fake;
    if (s.empty()) return Label::unlabeled;
  }
  throw ParseError("label must be 1 (fake), 0 (real) or null, got " + v.dump(), line);
}

std::uint64_t parse_count_text(const std::string& s, const char* field, std::size_t line) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    if (s.empty() || s.front() == '-') throw std::invalid_argument(s);
    v = std::stoull(s, &used);
  } catch (const std::exception&) {
    throw ParseError(std::string(field) + " must be a non-negative integer, got '" + s + "'", line);
  }
  if (used != s.size()) throw ParseError(std::string(field) + " must be a non-negative integer, got '" + s + "'", line);
  return v;
}

std::optional<std::uint64_t> count_from_json(const json& obj, const char* field, std::size_t line) {
  auto it = obj.find(field);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (it->is_number_unsigned()) return it->get<std::uint64_t>();
  if (it->is_number_integer() && it->get<long long>() >= 0) return static_cast<std::uint64_t>(it->get<long long>());
  throw ParseError(std::string(field) + " must be a non-negative integer or null", line);
}

std::string string_from_json(const json& obj, const char* field, std::size_t line) {
  auto it = obj.find(field);
  if (it == obj.end() || it->is_null()) return {};
  if (!it->is_string()) throw ParseError(std::string(field) + " must be a string", line);
  return it->get<std::string>();
}

std::optional<sys_days> date_from_text(const std::string& text, const char* field, std::size_t line) {
  if (text.empty()) return std::nullopt;
  auto d = parse_date(text);
  if (!d) throw ParseError(std::string(field) + " must be a YYYY-MM-DD date, got '" + text + "'", line);
  return d;
}

std::optional<sys_days> date_from_json(const json& obj, const char* field, std::size_t line) {
  auto it = obj.find(field);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw ParseError(std::string(field) + " must be a date string or null", line);
  return date_from_text(it->get<std::string>(), field, line);
}

std::vector<std::string> replies_from_json(const json& v, std::size_t line) {
  if (v.is_null()) return {};
  if (!v.is_array()) throw ParseError("reply_texts must be an array of strings", line);
  std::vector<std::string> out;
  for (const auto& item : v) {
    if (!item.is_string()) throw ParseError("reply_texts must be an array of strings", line);
    out.push_back(item.get<std::string>());
  }
  return out;
}

NewsRecord record_from_json(const json& obj, std::size_t line) {
  if (!obj.is_object()) throw ParseError("expected a JSON object", line);
  NewsRecord r;
  r.id = string_from_json(obj, "id", line);
  if (r.id.empty()) throw ParseError("record id is missing or empty", line);
  r.title = string_from_json(obj, "title", line);
  r.news_text = string_from_json(obj, "news_text", line);
  r.source = string_from_json(obj, "source", line);
  r.tweet_text = string_from_json(obj, "tweet_text", line);
  if (auto it = obj.find("reply_texts"); it != obj.end()) r.reply_texts = replies_from_json(*it, line);
  r.news_date = date_from_json(obj, "news_date", line);
  r.tweet_date = date_from_json(obj, "tweet_date", line);
  r.user_registration_date = date_from_json(obj, "user_registration_date", line);
  r.retweet_count = count_from_json(obj, "retweet_count", line);
  r.user_tweet_count = count_from_json(obj, "user_tweet_count", line);
  r.follower_count = count_from_json(obj, "follower_count", line);
  r.following_count = count_from_json(obj, "following_count", line);
  r.like_count = count_from_json(obj, "like_count", line);
  if (auto it = obj.find("post_device"); it != obj.end() && !it->is_null()) {
    if (!it->is_string()) throw ParseError("post_device must be a string or null", line);
    r.post_device = it->get<std::string>();
  }
  if (auto it = obj.find("label"); it != obj.end()) r.label = parse_label_value(*it, line);
  return r;
}

void check_unique(const std::string& id, std::size_t line, std::unordered_set<std::string>& seen) {
  if (!seen.insert(id).second) throw ParseError("duplicate record id '" + id + "'", line);
}

std::vector<NewsRecord> load_jsonl(std::istream& in) {
  std::vector<NewsRecord> records;
  std::unordered_set<std::string> seen;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text.find_first_not_of(" \t") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ParseError(std::string("malformed JSON: ") + e.what(), line);
    }
    records.push_back(record_from_json(obj, line));
    check_unique(records.back().id, line, seen);
  }
  return records;
}

std::vector<NewsRecord> load_csv(std::istream& in) {
  CsvReader reader(in);
  auto header = reader.next();
  if (!header) return {};
  std::map<std::string, std::size_t> column;
  for (std::size_t i = 0; i < header->fields.size(); ++i) column[header->fields[i]] = i;
  if (!column.count("id")) throw ParseError("CSV header lacks an 'id' column", header->line);

  std::vector<NewsRecord> records;
  std::unordered_set<std::string> seen;
  while (auto row = reader.next()) {
    const std::size_t line = row->line;
    if (row->fields.size() == 1 && row->fields[0].empty()) continue;
    if (row->fields.size() != header->fields.size()) {
      throw ParseError("expected " + std::to_string(header->fields.size()) + " fields, got " +
                           std::to_string(row->fields.size()),
                       line);
    }
    auto cell = [&](const char* name) -> const std::string* {
      auto it = column.find(name);
      return it == column.end() ? nullptr : &row->fields[it->second];
    };
    auto text = [&](const char* name) { return cell(name) ? *cell(name) : std::string(); };
    auto count = [&](const char* name) -> std::optional<std::uint64_t> {
      const std::string* c = cell(name);
      if (c == nullptr || c->empty()) return std::nullopt;
      return parse_count_text(*c, name, line);
    };

    NewsRecord r;
    r.id = text("id");
    if (r.id.empty()) throw ParseError("record id is missing or empty", line);
    r.title = text("title");
    r.news_text = text("news_text");
    r.source = text("source");
    r.tweet_text = text("tweet_text");
    if (const std::string* replies = cell("reply_texts"); replies && !replies->empty()) {
      try {
        r.reply_texts = replies_from_json(json::parse(*replies), line);
      } catch (const json::parse_error&) {
        throw ParseError("reply_texts must be a JSON array of strings", line);
      }
    }
    r.news_date = date_from_text(text("news_date"), "news_date", line);
    r.tweet_date = date_from_text(text("tweet_date"), "tweet_date", line);
    r.user_registration_date = date_from_text(text("user_registration_date"), "user_registration_date", line);
    r.retweet_count = count("retweet_count");
    r.user_tweet_count = count("user_tweet_count");
    r.follower_count = count("follower_count");
    r.following_count = count("following_count");
    r.like_count = count("like_count");
    if (const std::string* device = cell("post_device"); device && !device->empty()) r.post_device = *device;
    r.label = parse_label_value(json(text("label")), line);
    check_unique(r.id, line, seen);
    records.push_back(std::move(r));
  }
  return records;
}

json record_to_json(const NewsRecord& r) {
  auto date = [](const std::optional<sys_days>& d) { return d ? json(format_date(*d)) : json(nullptr); };
  auto count = [](const std::optional<std::uint64_t>& c) { return c ? json(*c) : json(nullptr); };
  json obj = json::object();
  obj["id"] = r.id;
  obj["title"] = r.title;
  obj["news_text"] = r.news_text;
  obj["source"] = r.source;
  obj["tweet_text"] = r.tweet_text;
  obj["reply_texts"] = r.reply_texts;
  obj["news_date"] = date(r.news_date);
  obj["tweet_date"] = date(r.tweet_date);
  obj["user_registration_date"] = date(r.user_registration_date);
  obj["retweet_count"] = count(r.retweet_count);
  obj["user_tweet_count"] = count(r.user_tweet_count);
  obj["follower_count"] = count(r.follower_count);
  obj["following_count"] = count(r.following_count);
  obj["like_count"] = count(r.like_count);
  obj["post_device"] = r.post_device ? json(*r.post_device) : json(nullptr);
  obj["label"] = r.labeled() ? json(static_cast<int>(r.label)) : json(nullptr);
  return obj;
}

// Splits `total` across groups proportionally to `weights` (largest remainder,
// earlier groups win ties).
std::vector<std::size_t> apportion(std::size_t total, const std::vector<std::size_t>& weights) {
  const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<std::size_t> out(weights.size(), 0);
  if (sum == 0.0) return out;
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double exact = static_cast<double>(total) * static_cast<double>(weights[i]) / sum;
    out[i] = static_cast<std::size_t>(std::floor(exact));
    assigned += out[i];
    remainders.emplace_back(exact - std::floor(exact), i);
  }
  std::stable_sort(remainders.begin(), remainders.end(), [](auto& a, auto& b) { return a.first > b.first; });
  for (std::size_t j = 0; assigned < total; ++j, ++assigned) ++out[remainders[j % remainders.size()].second];
  return out;
}

}  // namespace

CorpusFormat parse_corpus_format(const std::string& name) {
  if (name == "jsonl") return CorpusFormat::jsonl;
  if (name == "csv") return CorpusFormat::csv;
  throw ConfigError("unknown corpus format '" + name + "' (expected jsonl or csv)");
}

CorpusFormat guess_corpus_format(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? CorpusFormat::csv : CorpusFormat::jsonl;
}

std::optional<sys_days> parse_date(const std::string& text) {
  if (text.size() < 10) return std::nullopt;
  if (text.size() > 10 && text[10] != 'T' && text[10] != ' ') return std::nullopt;
  int y = 0;
  unsigned m = 0;
  unsigned d = 0;
  char tail = 0;
  const std::string head = text.substr(0, 10);
  if (std::sscanf(head.c_str(), "%4d-%2u-%2u%c", &y, &m, &d, &tail) != 3) return std::nullopt;
  if (head[4] != '-' || head[7] != '-') return std::nullopt;
  const year_month_day ymd{year{y}, month{m}, day{d}};
  if (!ymd.ok()) return std::nullopt;
  return sys_days{ymd};
}

std::string format_date(sys_days day_point) {
  const year_month_day ymd{day_point};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()));
  return buf;
}

std::vector<NewsRecord> load_records(const std::filesystem::path& path, CorpusFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open corpus " + path.string());
  return format == CorpusFormat::jsonl ? load_jsonl(in) : load_csv(in);
}

void write_jsonl(const std::filesystem::path& path, std::span<const NewsRecord> records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const auto& r : records) out << record_to_json(r).dump() << '\n';
}

// ---- splits ---------------------------------------------------------------

const char* split_part_name(SplitPart part) {
  switch (part) {
    case SplitPart::train:
      return "train";
    case SplitPart::validation:
      return "validation";
    case SplitPart::test:
      return "test";
  }
  return "?";
}

std::optional<SplitPart> DatasetSplit::part_of(const std::string& id) const {
  auto it = membership_.find(id);
  if (it == membership_.end()) return std::nullopt;
  return it->second;
}

DatasetSplit make_split(std::vector<std::string> train, std::vector<std::string> validation,
                        std::vector<std::string> test) {
  DatasetSplit s;
  s.train = std::move(train);
  s.validation = std::move(validation);
  s.test = std::move(test);
  for (auto [ids, part] : {std::pair{&s.train, SplitPart::train}, std::pair{&s.validation, SplitPart::validation},
                           std::pair{&s.test, SplitPart::test}}) {
    for (const auto& id : *ids) {
      if (!s.membership_.emplace(id, part).second) {
        throw ContractError("split: id '" + id + "' assigned to more than one part");
      }
    }
  }
  return s;
}

DatasetSplit split(std::span<const NewsRecord> records, SplitRatios ratios, std::uint64_t seed) {
  if (!(ratios.train > 0.0 && ratios.validation > 0.0 && ratios.test > 0.0) ||
      std::abs(ratios.train + ratios.validation + ratios.test - 1.0) > 1e-9) {
    throw ConfigError("split ratios must be positive and sum to 1");
  }
  const std::size_t n = records.size();
  const auto n_val = static_cast<std::size_t>(std::llround(static_cast<double>(n) * ratios.validation));
  const auto n_test = static_cast<std::size_t>(std::llround(static_cast<double>(n) * ratios.test));
  if (n_val == 0 || n_test == 0 || n_val + n_test >= n) {
    throw ConfigError("split of " + std::to_string(n) + " records leaves an empty part");
  }

  std::vector<std::size_t> fake, real, unlabeled;
  for (std::size_t i = 0; i < n; ++i) {
    switch (records[i].label) {
      case Label::fake:
        fake.push_back(i);
        break;
      case Label::real:
        real.push_back(i);
        break;
      case Label::unlabeled:
        unlabeled.push_back(i);
        break;
    }
  }
  Rng rng(mix_seed(seed, 0x5b17));
  rng.shuffle(fake);
  rng.shuffle(real);

  const auto val_quota = apportion(n_val, {fake.size(), real.size()});
  const auto test_quota = apportion(n_test, {fake.size(), real.size()});
  if (val_quota[0] + test_quota[0] > fake.size() || val_quota[1] + test_quota[1] > real.size()) {
    throw ConfigError("not enough labeled records to fill validation and test splits");
  }

  std::vector<std::size_t> val_idx, test_idx, train_idx = unlabeled;
  auto take = [](const std::vector<std::size_t>& pool, std::size_t n_v, std::size_t n_t, auto& v, auto& t, auto& tr) {
    for (std::size_t i = 0; i < pool.size(); ++i) {
      (i < n_v ? v : i < n_v + n_t ? t : tr).push_back(pool[i]);
    }
  };
  take(fake, val_quota[0], test_quota[0], val_idx, test_idx, train_idx);
  take(real, val_quota[1], test_quota[1], val_idx, test_idx, train_idx);

  auto ids = [&](std::vector<std::size_t>& idx) {
    std::sort(idx.begin(), idx.end());
    std::vector<std::string> out;
    out.reserve(idx.size());
    for (auto i : idx) out.push_back(records[i].id);
    return out;
  };
  return make_split(ids(train_idx), ids(val_idx), ids(test_idx));
}

FoldPlan make_folds(std::span<const NewsRecord> records, const DatasetSplit& split, std::size_t k,
                    std::uint64_t seed) {
  if (k < 2) throw ConfigError("number of folds must be at least 2, got " + std::to_string(k));
  std::unordered_map<std::string, Label> label_of;
  for (const auto& r : records) label_of.emplace(r.id, r.label);

  std::vector<std::string> labeled, unlabeled;
  for (const auto& id : split.train) {
    auto it = label_of.find(id);
    if (it == label_of.end()) throw ContractError("make_folds: train id '" + id + "' not among the records");
    (it->second == Label::unlabeled ? unlabeled : labeled).push_back(id);
  }
  if (labeled.empty()) throw ContractError("make_folds: the train split has no labeled records");
  if (labeled.size() < k) {
    throw ContractError("make_folds: need at least " + std::to_string(k) + " labeled train records, have " +
                        std::to_string(labeled.size()));
  }

  Rng rng(mix_seed(seed, 0xf01d));
  rng.shuffle(labeled);
  rng.shuffle(unlabeled);

  const std::size_t n = split.train.size();
  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.folds.resize(k);
  std::vector<std::size_t> sizes(k, n / k);
  for (std::size_t i = 0; i < n % k; ++i) ++sizes[i];

  const std::size_t from_labeled = std::min(labeled.size(), sizes[0]);
  for (std::size_t i = 0; i < from_labeled; ++i) {
    plan.folds[0].push_back(labeled[i]);
    plan.labeled.insert(labeled[i]);
  }
  std::vector<std::string> rest(labeled.begin() + static_cast<std::ptrdiff_t>(from_labeled), labeled.end());
  std::size_t u = 0;
  while (plan.folds[0].size() < sizes[0]) plan.folds[0].push_back(unlabeled[u++]);
  rest.insert(rest.end(), unlabeled.begin() + static_cast<std::ptrdiff_t>(u), unlabeled.end());
  rng.shuffle(rest);

  std::size_t next = 0;
  for (std::size_t f = 1; f < k; ++f) {
    for (std::size_t i = 0; i < sizes[f]; ++i) plan.folds[f].push_back(rest[next++]);
  }
  return plan;
}

void check_no_leakage(const FoldPlan& plan, const DatasetSplit& split) {
  if (plan.folds.size() != plan.k || plan.k < 2) {
    throw ContractError("fold plan declares k=" + std::to_string(plan.k) + " but holds " +
                        std::to_string(plan.folds.size()) + " folds");
  }
  std::unordered_set<std::string> seen;
  for (std::size_t f = 0; f < plan.folds.size(); ++f) {
    for (const auto& id : plan.folds[f]) {
      const auto part = split.part_of(id);
      if (part && *part != SplitPart::train) {
        throw LeakageError("fold " + std::to_string(f + 1) + " contains " + split_part_name(*part) + " record '" +
                           id + "'");
      }
      if (!part) throw ContractError("fold " + std::to_string(f + 1) + " contains unknown record '" + id + "'");
      if (!seen.insert(id).second) throw ContractError("record '" + id + "' appears in more than one fold");
    }
  }
  if (seen.size() != split.train.size()) throw ContractError("folds do not cover the train split");
  for (const auto& id : plan.labeled) {
    if (std::find(plan.folds[0].begin(), plan.folds[0].end(), id) == plan.folds[0].end()) {
      throw LeakageError("label of '" + id + "' is exposed outside fold 1");
    }
  }
}

void save_fold_plan(const std::filesystem::path& path, const FoldPlan& plan) {
  std::vector<std::string> labeled(plan.labeled.begin(), plan.labeled.end());
  std::sort(labeled.begin(), labeled.end());
  json obj = {{"k", plan.k}, {"seed", plan.seed}, {"folds", plan.folds}, {"labeled", labeled}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write fold plan " + path.string());
  out << obj.dump(1) << '\n';
}

FoldPlan load_fold_plan(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read fold plan " + path.string());
  try {
    const json obj = json::parse(in);
    FoldPlan plan;
    plan.k = obj.at("k").get<std::size_t>();
    plan.seed = obj.at("seed").get<std::uint64_t>();
    plan.folds = obj.at("folds").get<std::vector<std::vector<std::string>>>();
    for (const auto& id : obj.at("labeled")) plan.labeled.insert(id.get<std::string>());
    return plan;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed fold plan: ") + e.what(), 0);
  }
}

std::uint64_t fingerprint_ids(std::span<const std::string> ids) {
  std::vector<std::string> sorted(ids.begin(), ids.end());
  std::sort(sorted.begin(), sorted.end());
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (const auto& id : sorted) {
    for (unsigned char c : id) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    h ^= 0xff;  // separator outside the byte range of UTF-8 lead bytes
    h *= 0x100000001b3ULL;
  }
  return h;
}

// ---- features -------------------------------------------------------------

std::array<std::optional<double>, kNumericColumns> numeric_columns(const NewsRecord& r) {
  auto as_double = [](const std::optional<std::uint64_t>& v) -> std::optional<double> {
    return v ? std::optional<double>(static_cast<double>(*v)) : std::nullopt;
  };
  return {as_double(r.retweet_count), as_double(r.user_tweet_count), as_double(r.follower_count),
          as_double(r.following_count), as_double(r.like_count)};
}

NormalizationStats compute_stats(std::span<const NewsRecord> train_records, const DatasetSplit& split) {
  NormalizationStats stats;
  std::array<std::vector<double>, kNumericColumns> present;
  for (const auto& r : train_records) {
    const auto part = split.part_of(r.id);
    if (!part || *part != SplitPart::train) {
      throw ContractError("normalization stats must come from train records only; '" + r.id + "' is not in train");
    }
    const auto cols = numeric_columns(r);
    for (std::size_t c = 0; c < kNumericColumns; ++c) {
      if (cols[c]) present[c].push_back(*cols[c]);
    }
  }
  for (std::size_t c = 0; c < kNumericColumns; ++c) {
    auto values = present[c];
    if (!values.empty()) {
      std::sort(values.begin(), values.end());
      const std::size_t m = values.size();
      stats.median[c] = m % 2 ? values[m / 2] : 0.5 * (values[m / 2 - 1] + values[m / 2]);
    }
    const std::size_t total = train_records.size();
    if (total == 0) continue;
    const std::size_t missing = total - present[c].size();
    double sum = stats.median[c] * static_cast<double>(missing);
    for (double v : present[c]) sum += v;
    const double mean = sum / static_cast<double>(total);
    double sq = static_cast<double>(missing) * (stats.median[c] - mean) * (stats.median[c] - mean);
    for (double v : present[c]) sq += (v - mean) * (v - mean);
    stats.mean[c] = mean;
    stats.stddev[c] = std::sqrt(sq / static_cast<double>(total));
  }
  stats.train_fingerprint = fingerprint_ids(split.train);
  return stats;
}

Vocabulary build_vocabulary(std::span<const NewsRecord> records, const DatasetSplit& split,
                            VocabularyOptions options) {
  std::vector<TokenList> corpus;
  for (const auto& r : records) {
    const auto part = split.part_of(r.id);
    if (!part || *part != SplitPart::train) continue;
    corpus.push_back(tokenize(r.news_text));
    corpus.push_back(tokenize(r.tweet_text));
  }
  return Vocabulary::build(corpus, options);
}

FeatureAssembler::FeatureAssembler(const Vocabulary& vocab, const SentimentEncoder& encoder,
                                   const NormalizationStats& stats, const DatasetSplit& split,
                                   std::size_t max_seq_len)
    : vocab_(vocab), encoder_(encoder), stats_(stats), max_seq_len_(max_seq_len) {
  if (stats.train_fingerprint != fingerprint_ids(split.train)) {
    throw ContractError("normalization stats were computed on a different training split");
  }
  if (max_seq_len == 0) throw ConfigError("max_seq_len must be at least 1");
}

FeatureVector FeatureAssembler::assemble(const NewsRecord& record) const {
  FeatureVector fv;
  fv.text_channels.push_back(encode_pad(tokenize(record.news_text), vocab_, max_seq_len_));
  fv.text_channels.push_back(encode_pad(tokenize(record.tweet_text), vocab_, max_seq_len_));

  fv.aux.reserve(kAuxWidth);
  const auto cols = numeric_columns(record);
  for (std::size_t c = 0; c < kNumericColumns; ++c) {
    const double x = cols[c].value_or(stats_.median[c]);
    fv.aux.push_back(stats_.stddev[c] > 0.0 ? (x - stats_.mean[c]) / stats_.stddev[c] : 0.0);
  }
  fv.aux.push_back(record.news_date ? static_cast<double>((*record.news_date - kEpoch2000).count()) * kDateScale
                                    : 0.0);
  fv.aux.push_back(record.tweet_date && record.user_registration_date
                       ? static_cast<double>((*record.tweet_date - *record.user_registration_date).count()) *
                             kDateScale
                       : 0.0);
  const auto sentiment = encode_record(encoder_, record.id, record.news_text, record.tweet_text);
  fv.aux.insert(fv.aux.end(), sentiment.begin(), sentiment.end());
  return fv;
}

FeatureVector assemble_features(const NewsRecord& record, const Vocabulary& vocab, const SentimentEncoder& encoder,
                                const NormalizationStats& stats, const DatasetSplit& split,
                                std::size_t max_seq_len) {
  return FeatureAssembler(vocab, encoder, stats, split, max_seq_len).assemble(record);
}

std::size_t AssembledCorpus::index_of(const std::string& id) const {
  auto it = index.find(id);
  if (it == index.end()) throw LookupError("no assembled record with id '" + id + "'");
  return it->second;
}

AssembledCorpus assemble_corpus(std::span<const NewsRecord> records, const FeatureAssembler& assembler) {
  AssembledCorpus corpus;
  corpus.ids.reserve(records.size());
  corpus.labels.reserve(records.size());
  corpus.features.resize(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    corpus.ids.push_back(records[i].id);
    corpus.labels.push_back(records[i].label);
    corpus.index.emplace(records[i].id, i);
  }
  parallel_for(records.size(), [&](std::size_t i) { corpus.features[i] = assembler.assemble(records[i]); });
  return corpus;
}

}  // namespace fnd
