#include "startext/core/unicode.hpp"

#include <algorithm>
#include <cstdint>

#include "startext/core/utf8.hpp"

namespace startext {

namespace {

struct NfdEntry {
  char32_t cp;
  uint16_t offset;
  uint8_t len;
};
struct CccEntry {
  char32_t cp;
  uint8_t ccc;
};
struct ComposeEntry {
  char32_t first;
  char32_t second;
  char32_t composed;
};
struct ArabicFormEntry {
  char32_t base;
  uint8_t form;
  char32_t presentation;
};
struct LamAlefEntry {
  char32_t alef;
  char32_t isolated;
  char32_t final_;
};

#include "unicode_data.inc"

constexpr char32_t kHangulSBase = 0xAC00;
constexpr char32_t kHangulLBase = 0x1100;
constexpr char32_t kHangulVBase = 0x1161;
constexpr char32_t kHangulTBase = 0x11A7;
constexpr int kHangulVCount = 21;
constexpr int kHangulTCount = 28;
constexpr int kHangulNCount = kHangulVCount * kHangulTCount;
constexpr int kHangulSCount = 11172;

const NfdEntry* find_nfd(char32_t cp) {
  auto it = std::lower_bound(std::begin(kNfdIndex), std::end(kNfdIndex), cp,
                             [](const NfdEntry& e, char32_t c) { return e.cp < c; });
  return (it != std::end(kNfdIndex) && it->cp == cp) ? &*it : nullptr;
}

char32_t find_composition(char32_t a, char32_t b) {
  auto it = std::lower_bound(std::begin(kCompose), std::end(kCompose), std::pair{a, b},
                             [](const ComposeEntry& e, const std::pair<char32_t, char32_t>& k) {
                               return e.first != k.first ? e.first < k.first : e.second < k.second;
                             });
  return (it != std::end(kCompose) && it->first == a && it->second == b) ? it->composed : 0;
}

char32_t compose_pair(char32_t a, char32_t b) {
  if (a >= kHangulLBase && a < kHangulLBase + 19 && b >= kHangulVBase &&
      b < kHangulVBase + kHangulVCount) {
    return kHangulSBase +
           ((a - kHangulLBase) * kHangulVCount + (b - kHangulVBase)) * kHangulTCount;
  }
  if (a >= kHangulSBase && a < kHangulSBase + kHangulSCount &&
      (a - kHangulSBase) % kHangulTCount == 0 && b > kHangulTBase &&
      b < kHangulTBase + kHangulTCount) {
    return a + (b - kHangulTBase);
  }
  return find_composition(a, b);
}

void decompose_into(char32_t cp, std::u32string& out) {
  if (cp >= kHangulSBase && cp < kHangulSBase + kHangulSCount) {
    char32_t s = cp - kHangulSBase;
    out.push_back(kHangulLBase + s / kHangulNCount);
    out.push_back(kHangulVBase + (s % kHangulNCount) / kHangulTCount);
    if (s % kHangulTCount) out.push_back(kHangulTBase + s % kHangulTCount);
    return;
  }
  if (const NfdEntry* e = find_nfd(cp)) {
    // Table entries are full NFD expansions; no recursion needed.
    for (int i = 0; i < e->len; ++i) out.push_back(kNfdData[e->offset + i]);
    return;
  }
  out.push_back(cp);
}

}  // namespace

int combining_class(char32_t cp) {
  auto it = std::lower_bound(std::begin(kCcc), std::end(kCcc), cp,
                             [](const CccEntry& e, char32_t c) { return e.cp < c; });
  return (it != std::end(kCcc) && it->cp == cp) ? it->ccc : 0;
}

std::u32string nfc(const std::u32string& s) {
  std::u32string d;
  d.reserve(s.size());
  for (char32_t cp : s) decompose_into(cp, d);

  // Canonical ordering: stable-sort each run of nonzero-ccc marks.
  size_t i = 0;
  while (i < d.size()) {
    if (combining_class(d[i]) == 0) {
      ++i;
      continue;
    }
    size_t j = i;
    while (j < d.size() && combining_class(d[j]) != 0) ++j;
    std::stable_sort(d.begin() + i, d.begin() + j,
                     [](char32_t a, char32_t b) { return combining_class(a) < combining_class(b); });
    i = j;
  }

  // Canonical composition (UAX #15 sample algorithm).
  if (d.empty()) return d;
  std::u32string out;
  out.reserve(d.size());
  size_t starter_pos = 0;
  char32_t starter = d[0];
  int last_class = combining_class(starter);
  if (last_class != 0) last_class = 256;  // leading mark: never compose with it
  out.push_back(starter);
  for (size_t k = 1; k < d.size(); ++k) {
    char32_t ch = d[k];
    int ch_class = combining_class(ch);
    char32_t composite = compose_pair(starter, ch);
    if (composite != 0 && (last_class < ch_class || last_class == 0)) {
      out[starter_pos] = composite;
      starter = composite;
    } else {
      if (ch_class == 0) {
        starter_pos = out.size();
        starter = ch;
      }
      last_class = ch_class;
      out.push_back(ch);
    }
  }
  return out;
}

std::string nfc_utf8(const std::string& s) { return utf8_encode(nfc(utf8_decode(s))); }

char32_t arabic_presentation_form(char32_t base, ArabicForm form) {
  auto key = std::pair{base, static_cast<uint8_t>(form)};
  auto it = std::lower_bound(std::begin(kArabicForms), std::end(kArabicForms), key,
                             [](const ArabicFormEntry& e, const std::pair<char32_t, uint8_t>& k) {
                               return e.base != k.first ? e.base < k.first : e.form < k.second;
                             });
  return (it != std::end(kArabicForms) && it->base == key.first && it->form == key.second)
             ? it->presentation
             : 0;
}

char32_t lam_alef_ligature(char32_t alef_variant, bool joined_before) {
  for (const auto& e : kLamAlef)
    if (e.alef == alef_variant) return joined_before ? e.final_ : e.isolated;
  return 0;
}

}  // namespace startext
