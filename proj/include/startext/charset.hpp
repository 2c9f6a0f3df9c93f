#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace startext {

// Ordered per-language symbol inventory. Index 0 is the CTC blank; symbols
// occupy [1, size()]. Symbols are unique NFC codepoints sorted by value.
class Charset {
 public:
  Charset() = default;
  Charset(std::string language, std::vector<char32_t> sorted_symbols);

  const std::string& language() const { return language_; }
  const std::vector<char32_t>& symbols() const { return symbols_; }
  static constexpr int blank_index() { return 0; }
  int size() const { return static_cast<int>(symbols_.size()); }
  int num_classes() const { return size() + 1; }  // symbols + blank

  // Index in [1, size()] or 0 if the codepoint is not in the charset.
  int index_of(char32_t cp) const;
  char32_t symbol_at(int index) const;  // index in [1, size()]
  bool covers(char32_t cp) const { return index_of(cp) != 0; }

  std::string to_json() const;
  static Charset from_json(const std::string& json_text);
  void save(const std::string& path) const;
  static Charset load(const std::string& path);

  // Hash of the canonical serialization; recorded in checkpoints so train
  // and eval can detect charset mismatches.
  uint64_t content_hash() const;

 private:
  std::string language_;
  std::vector<char32_t> symbols_;
  std::unordered_map<char32_t, int> index_;
};

struct LabelSequence {
  std::vector<int> indices;  // each in [1, charset.size()], never blank
  std::string source_text;   // NFC
};

// Builds the charset from a corpus of example texts: symbols = sorted set of
// all NFC codepoints. Throws ValidationError on an empty corpus.
Charset build_charset(const std::vector<std::string>& texts, const std::string& language);

// Text -> label indices over NFC codepoints. Throws ValidationError naming
// the codepoint and position on coverage violations.
LabelSequence encode(const Charset& charset, const std::string& text);

// Label indices -> text. Throws ValidationError on blank or out-of-range.
std::string decode(const Charset& charset, const std::vector<int>& indices);

// The CTC many-to-one collapse: drop consecutive duplicates, then blanks.
std::vector<int> collapse_path(const std::vector<int>& path);

}  // namespace startext
