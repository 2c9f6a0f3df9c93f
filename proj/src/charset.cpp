#include "startext/charset.hpp"

#include <algorithm>
#include <set>

#include "json.hpp"
#include "startext/core/error.hpp"
#include "startext/core/io.hpp"
#include "startext/core/unicode.hpp"
#include "startext/core/utf8.hpp"

namespace startext {

namespace {

std::string cp_hex(char32_t cp) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04X", static_cast<unsigned>(cp));
  return buf;
}

}  // namespace

Charset::Charset(std::string language, std::vector<char32_t> sorted_symbols)
    : language_(std::move(language)), symbols_(std::move(sorted_symbols)) {
  for (size_t i = 1; i < symbols_.size(); ++i)
    if (symbols_[i - 1] >= symbols_[i])
      throw ValidationError("charset symbols must be unique and sorted");
  for (size_t i = 0; i < symbols_.size(); ++i) index_[symbols_[i]] = static_cast<int>(i) + 1;
}

int Charset::index_of(char32_t cp) const {
  auto it = index_.find(cp);
  return it == index_.end() ? 0 : it->second;
}

char32_t Charset::symbol_at(int index) const {
  if (index < 1 || index > size())
    throw ValidationError("charset index out of range: " + std::to_string(index));
  return symbols_[static_cast<size_t>(index) - 1];
}

std::string Charset::to_json() const {
  nlohmann::json j;
  j["language"] = language_;
  std::vector<std::string> syms;
  syms.reserve(symbols_.size());
  for (char32_t cp : symbols_) syms.push_back(cp_hex(cp));
  j["symbols"] = syms;
  j["blank_index"] = blank_index();
  return j.dump(2) + "\n";
}

Charset Charset::from_json(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("charset JSON parse error: ") + e.what());
  }
  if (!j.contains("language") || !j.contains("symbols"))
    throw ValidationError("charset JSON missing required fields");
  if (j.value("blank_index", 0) != 0)
    throw ValidationError("charset blank_index must be 0");
  std::vector<char32_t> syms;
  for (const auto& s : j["symbols"]) {
    const std::string hex = s.get<std::string>();
    syms.push_back(static_cast<char32_t>(std::stoul(hex, nullptr, 16)));
  }
  return Charset(j["language"].get<std::string>(), std::move(syms));
}

void Charset::save(const std::string& path) const { write_file(path, to_json()); }

Charset Charset::load(const std::string& path) { return from_json(read_file(path)); }

uint64_t Charset::content_hash() const { return fnv1a64(to_json()); }

Charset build_charset(const std::vector<std::string>& texts, const std::string& language) {
  if (texts.empty()) throw ValidationError("empty corpus");
  std::set<char32_t> set;
  for (const auto& t : texts) {
    for (char32_t cp : nfc(utf8_decode(t))) set.insert(cp);
  }
  return Charset(language, std::vector<char32_t>(set.begin(), set.end()));
}

LabelSequence encode(const Charset& charset, const std::string& text) {
  std::u32string norm = nfc(utf8_decode(text));
  LabelSequence seq;
  seq.source_text = utf8_encode(norm);
  seq.indices.reserve(norm.size());
  for (size_t i = 0; i < norm.size(); ++i) {
    int idx = charset.index_of(norm[i]);
    if (idx == 0) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "codepoint U+%04X at position %zu not in charset",
                    static_cast<unsigned>(norm[i]), i);
      throw ValidationError(buf);
    }
    seq.indices.push_back(idx);
  }
  return seq;
}

std::string decode(const Charset& charset, const std::vector<int>& indices) {
  std::u32string out;
  out.reserve(indices.size());
  for (int idx : indices) {
    if (idx == Charset::blank_index()) throw ValidationError("blank in label sequence");
    out.push_back(charset.symbol_at(idx));
  }
  return utf8_encode(out);
}

std::vector<int> collapse_path(const std::vector<int>& path) {
  std::vector<int> out;
  out.reserve(path.size());
  int prev = -1;
  for (int v : path) {
    if (v != prev && v != Charset::blank_index()) out.push_back(v);
    prev = v;
  }
  return out;
}

}  // namespace startext
