#include "ccse/corpus.hpp"

#include "ccse/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <map>
#include <stdexcept>

namespace ccse {
namespace {

using nlohmann::json;

std::vector<std::string> string_array(const json& record, const char* field, std::size_t line_no) {
  const auto it = record.find(field);
  if (it == record.end()) return {};
  if (!it->is_array()) {
    throw std::runtime_error("line " + std::to_string(line_no) + ": field '" + field +
                             "' must be an array of strings");
  }
  std::vector<std::string> out;
  out.reserve(it->size());
  for (const auto& item : *it) {
    if (!item.is_string()) {
      throw std::runtime_error("line " + std::to_string(line_no) + ": field '" + field +
                               "' must be an array of strings");
    }
    out.push_back(item.get<std::string>());
  }
  return out;
}

bool blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); });
}

}  // namespace

Index LanguageStats::find(std::string_view language) const {
  for (Index i = 0; i < size(); ++i) {
    if (languages[static_cast<std::size_t>(i)] == language) return i;
  }
  return -1;
}

Corpus load_corpus(const std::filesystem::path& path, const std::vector<std::string>& languages) {
  if (languages.empty()) throw std::invalid_argument("language set is empty");
  for (std::size_t i = 0; i < languages.size(); ++i) {
    for (std::size_t j = i + 1; j < languages.size(); ++j) {
      if (languages[i] == languages[j]) {
        throw std::invalid_argument("duplicate language in set: " + languages[i]);
      }
    }
  }

  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open corpus file: " + path.string());

  Corpus corpus;
  corpus.stats.languages = languages;
  corpus.stats.counts.assign(languages.size(), 0);
  corpus.by_language.resize(languages.size());

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;

    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error&) {
      throw std::runtime_error("line " + std::to_string(line_no) + ": invalid JSON");
    }
    if (!record.is_object()) {
      throw std::runtime_error("line " + std::to_string(line_no) + ": record is not a JSON object");
    }

    const auto lang_it = record.find("language");
    if (lang_it == record.end() || !lang_it->is_string()) {
      throw std::runtime_error("line " + std::to_string(line_no) + ": missing field 'language'");
    }
    const std::string language = lang_it->get<std::string>();
    const Index lang_pos = corpus.stats.find(language);
    if (lang_pos < 0) {
      ++corpus.skipped_unknown_language;
      continue;
    }

    // HuggingFace exports use func_code_tokens; the original naming is
    // code_tokens. First present wins.
    const char* code_field = record.contains("code_tokens")        ? "code_tokens"
                             : record.contains("func_code_tokens") ? "func_code_tokens"
                                                                   : nullptr;
    if (code_field == nullptr) {
      throw std::runtime_error("line " + std::to_string(line_no) +
                               ": missing field 'code_tokens' (or 'func_code_tokens')");
    }
    std::vector<std::string> code = string_array(record, code_field, line_no);
    if (code.empty()) {
      throw std::runtime_error("line " + std::to_string(line_no) + ": empty field '" + code_field + "'");
    }
    if (!record.contains("docstring_tokens")) {
      throw std::runtime_error("line " + std::to_string(line_no) + ": missing field 'docstring_tokens'");
    }
    std::vector<std::string> docs = string_array(record, "docstring_tokens", line_no);
    if (docs.empty()) {
      throw std::runtime_error("line " + std::to_string(line_no) + ": empty field 'docstring_tokens'");
    }

    std::string id;
    if (const auto it = record.find("id"); it != record.end() && it->is_string()) {
      id = it->get<std::string>();
    } else if (const auto fn = record.find("func_name"); fn != record.end() && fn->is_string()) {
      id = fn->get<std::string>();
    } else {
      id = "line:" + std::to_string(line_no);
    }

    corpus.by_language[static_cast<std::size_t>(lang_pos)].push_back(corpus.examples.size());
    corpus.stats.counts[static_cast<std::size_t>(lang_pos)] += 1;
    corpus.examples.push_back({std::move(id), language, std::move(code), std::move(docs)});
  }
  if (in.bad()) throw std::runtime_error("read failed: " + path.string());
  if (corpus.examples.empty()) throw std::runtime_error("empty corpus: " + path.string());

  corpus.stats.total = static_cast<std::int64_t>(corpus.examples.size());
  corpus.stats.fractions.resize(languages.size());
  for (std::size_t i = 0; i < languages.size(); ++i) {
    corpus.stats.fractions[i] =
        static_cast<double>(corpus.stats.counts[i]) / static_cast<double>(corpus.stats.total);
  }
  return corpus;
}

Vocabulary::Vocabulary() : Vocabulary(std::vector<std::string>{"<pad>", "<unk>", "<cls>", "<sep>"}) {}

Vocabulary::Vocabulary(std::vector<std::string> id_to_token) : id_to_token_(std::move(id_to_token)) {
  if (id_to_token_.size() < static_cast<std::size_t>(kReserved)) {
    throw std::invalid_argument("vocabulary must contain the four reserved entries");
  }
  token_to_id_.reserve(id_to_token_.size());
  for (std::size_t i = kReserved; i < id_to_token_.size(); ++i) {
    const auto [it, inserted] = token_to_id_.emplace(id_to_token_[i], static_cast<std::int32_t>(i));
    if (!inserted) throw std::invalid_argument("duplicate vocabulary token: " + id_to_token_[i]);
  }
}

std::int32_t Vocabulary::id(const std::string& token) const {
  const auto it = token_to_id_.find(token);
  return it == token_to_id_.end() ? kUnk : it->second;
}

std::uint64_t Vocabulary::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const auto& token : id_to_token_) {
    h = mix_seed(h, fnv1a(token));
  }
  return h;
}

Vocabulary build_vocab(const Corpus& corpus, std::int32_t max_size) {
  if (corpus.examples.empty()) throw std::invalid_argument("corpus is empty");
  if (max_size < Vocabulary::kReserved) {
    throw std::invalid_argument("max_size must be at least " + std::to_string(Vocabulary::kReserved));
  }

  // std::map keeps tokens sorted, which settles frequency ties lexicographically.
  std::map<std::string, std::int64_t> counts;
  for (const auto& example : corpus.examples) {
    for (const auto& token : example.code_tokens) counts[token] += 1;
    for (const auto& token : example.doc_tokens) counts[token] += 1;
  }

  std::vector<std::pair<std::string, std::int64_t>> by_count(counts.begin(), counts.end());
  std::stable_sort(by_count.begin(), by_count.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });

  const std::size_t keep = std::min<std::size_t>(by_count.size(),
                                                 static_cast<std::size_t>(max_size - Vocabulary::kReserved));
  std::vector<std::string> tokens = {"<pad>", "<unk>", "<cls>", "<sep>"};
  tokens.reserve(Vocabulary::kReserved + keep);
  for (std::size_t i = 0; i < keep; ++i) tokens.push_back(by_count[i].first);
  return Vocabulary(std::move(tokens));
}

TokenIds encode_tokens(const std::vector<std::string>& tokens, const Vocabulary& vocab, Index max_len) {
  if (max_len < 2) throw std::invalid_argument("max_len must be at least 2");
  TokenIds out;
  out.ids.assign(static_cast<std::size_t>(max_len), Vocabulary::kPad);
  out.mask.assign(static_cast<std::size_t>(max_len), 0);
  out.ids[0] = Vocabulary::kCls;
  out.mask[0] = 1;
  const std::size_t n = std::min<std::size_t>(tokens.size(), static_cast<std::size_t>(max_len - 1));
  for (std::size_t i = 0; i < n; ++i) {
    out.ids[i + 1] = vocab.id(tokens[i]);
    out.mask[i + 1] = 1;
  }
  return out;
}

EncodedCorpus encode_corpus(const Corpus& corpus, const Vocabulary& vocab, Index max_len) {
  const Index n = static_cast<Index>(corpus.examples.size());
  EncodedCorpus out;
  out.code.ids.resize(n, max_len);
  out.code.mask.resize(n, max_len);
  out.docs.ids.resize(n, max_len);
  out.docs.mask.resize(n, max_len);
  for (Index i = 0; i < n; ++i) {
    const auto& example = corpus.examples[static_cast<std::size_t>(i)];
    const TokenIds code = encode_tokens(example.code_tokens, vocab, max_len);
    const TokenIds docs = encode_tokens(example.doc_tokens, vocab, max_len);
    for (Index t = 0; t < max_len; ++t) {
      out.code.ids(i, t) = code.ids[static_cast<std::size_t>(t)];
      out.code.mask(i, t) = code.mask[static_cast<std::size_t>(t)];
      out.docs.ids(i, t) = docs.ids[static_cast<std::size_t>(t)];
      out.docs.mask(i, t) = docs.mask[static_cast<std::size_t>(t)];
    }
  }
  return out;
}

TokenBatch gather_rows(const EncodedCorpus& encoded, Side side, const std::vector<std::size_t>& rows) {
  const TokenBatch& source = side == Side::kCode ? encoded.code : encoded.docs;
  TokenBatch out;
  out.ids.resize(static_cast<Index>(rows.size()), source.seq());
  out.mask.resize(static_cast<Index>(rows.size()), source.seq());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.ids.row(static_cast<Index>(i)) = source.ids.row(static_cast<Index>(rows[i]));
    out.mask.row(static_cast<Index>(i)) = source.mask.row(static_cast<Index>(rows[i]));
  }
  return out;
}

}  // namespace ccse
