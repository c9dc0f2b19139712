#pragma once

#include "ccse/types.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ccse {

// One bimodal (code, document) pair; the unit of training data.
struct CorpusExample {
  std::string id;
  std::string language;
  std::vector<std::string> code_tokens;
  std::vector<std::string> doc_tokens;
};

struct LanguageStats {
  std::vector<std::string> languages;  // configured order
  std::vector<std::int64_t> counts;    // pairs per language
  std::vector<double> fractions;       // counts / total
  std::int64_t total = 0;

  Index size() const { return static_cast<Index>(languages.size()); }
  // Position of `language`, or -1.
  Index find(std::string_view language) const;
};

struct Corpus {
  std::vector<CorpusExample> examples;
  LanguageStats stats;
  // Example positions per language, aligned with stats.languages.
  std::vector<std::vector<std::size_t>> by_language;
  std::int64_t skipped_unknown_language = 0;
};

// Reads JSONL records {language, code_tokens|func_code_tokens, docstring_tokens,
// id|func_name} and keeps those whose language is in `languages`. Records with a
// language outside the set are counted and skipped; structurally bad lines are
// fatal with the 1-based line number in the message.
Corpus load_corpus(const std::filesystem::path& path, const std::vector<std::string>& languages);

class Vocabulary {
 public:
  static constexpr std::int32_t kPad = 0;
  static constexpr std::int32_t kUnk = 1;
  static constexpr std::int32_t kCls = 2;
  static constexpr std::int32_t kSep = 3;
  static constexpr std::int32_t kReserved = 4;

  Vocabulary();
  // Tokens in id order; the first four entries must be the reserved ones.
  explicit Vocabulary(std::vector<std::string> id_to_token);

  std::int32_t id(const std::string& token) const;  // kUnk when absent
  std::int32_t size() const { return static_cast<std::int32_t>(id_to_token_.size()); }
  const std::vector<std::string>& tokens() const { return id_to_token_; }
  std::uint64_t hash() const;

 private:
  std::vector<std::string> id_to_token_;
  std::unordered_map<std::string, std::int32_t> token_to_id_;
};

// Most frequent tokens across code and documents, ties broken by lexicographic
// token order. Final size is at most max_size including the reserved ids.
Vocabulary build_vocab(const Corpus& corpus, std::int32_t max_size);

struct TokenIds {
  std::vector<std::int32_t> ids;     // length max_len, CLS first, PAD tail
  std::vector<std::uint8_t> mask;    // 1 on real positions
};

TokenIds encode_tokens(const std::vector<std::string>& tokens, const Vocabulary& vocab, Index max_len);

// A batch of encoded sequences, one row per example.
struct TokenBatch {
  IdMatrix ids;     // n x max_len
  MaskMatrix mask;  // n x max_len
  Index batch() const { return ids.rows(); }
  Index seq() const { return ids.cols(); }
};

enum class Side { kCode, kDoc };

// Whole corpus pre-encoded once per (vocab, max_len); batches slice rows.
struct EncodedCorpus {
  TokenBatch code;
  TokenBatch docs;
};

EncodedCorpus encode_corpus(const Corpus& corpus, const Vocabulary& vocab, Index max_len);
TokenBatch gather_rows(const EncodedCorpus& encoded, Side side, const std::vector<std::size_t>& rows);

}  // namespace ccse
