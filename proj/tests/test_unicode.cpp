#include "doctest.h"
#include "startext/core/error.hpp"
#include "startext/core/rng.hpp"
#include "startext/core/unicode.hpp"
#include "startext/core/utf8.hpp"

using namespace startext;

namespace {

std::u32string u32(std::initializer_list<char32_t> cps) { return std::u32string(cps); }

}  // namespace

TEST_SUITE("unicode") {

TEST_CASE("utf8 roundtrip") {
  std::u32string s = u32({0x61, 0x645, 0x905, 0x1F600, 0x7F, 0x80, 0x7FF, 0x800, 0xFFFF, 0x10000});
  CHECK(utf8_decode(utf8_encode(s)) == s);
}

TEST_CASE("utf8 rejects malformed input") {
  CHECK_THROWS_AS(utf8_decode("\xC0\xAF"), ValidationError);          // overlong
  CHECK_THROWS_AS(utf8_decode("\xED\xA0\x80"), ValidationError);      // surrogate
  CHECK_THROWS_AS(utf8_decode("\xE0\x80"), ValidationError);          // truncated
  CHECK_THROWS_AS(utf8_decode("\x80"), ValidationError);              // stray continuation
  CHECK_THROWS_AS(utf8_decode("\xF5\x80\x80\x80"), ValidationError);  // > U+10FFFF
}

// Expected values frozen from Python unicodedata (UCD 13.0).
TEST_CASE("nfc matches unicodedata oracle") {
  CHECK(nfc(u32({0x65, 0x301})) == u32({0xE9}));
  CHECK(nfc(u32({0xE9})) == u32({0xE9}));
  // Devanagari qa is a composition exclusion: it stays decomposed.
  CHECK(nfc(u32({0x958})) == u32({0x915, 0x93C}));
  CHECK(nfc(u32({0x915, 0x93C})) == u32({0x915, 0x93C}));
  // combining marks reorder by ccc, composition skips the blocked mark
  CHECK(nfc(u32({0x61, 0x316, 0x301})) == u32({0xE1, 0x316}));
  CHECK(nfc(u32({0x61, 0x301, 0x316})) == u32({0xE1, 0x316}));
  // Hangul algorithmic composition
  CHECK(nfc(u32({0x1100, 0x1161})) == u32({0xAC00}));
  CHECK(nfc(u32({0x1100, 0x1161, 0x11A8})) == u32({0xAC01}));
  // singleton decompositions
  CHECK(nfc(u32({0x212B})) == u32({0xC5}));
  CHECK(nfc(u32({0x41, 0x30A})) == u32({0xC5}));
  CHECK(nfc(u32({0x2126})) == u32({0x3A9}));
  CHECK(nfc(u32({0x61, 0x5AE, 0x300, 0x315, 0x62})) == u32({0xE0, 0x5AE, 0x315, 0x62}));
  // Devanagari cluster and Arabic lam+alef pass through untouched
  CHECK(nfc(u32({0x938, 0x94D, 0x924, 0x947})) == u32({0x938, 0x94D, 0x924, 0x947}));
  CHECK(nfc(u32({0x644, 0x627})) == u32({0x644, 0x627}));
  CHECK(nfc(std::u32string()) == std::u32string());
}

TEST_CASE("nfc is idempotent on random strings") {
  CounterRng rng(2024);
  const char32_t pool[] = {0x61, 0x62, 0x65, 0x301, 0x316, 0x30A, 0x915, 0x93C,
                           0x938, 0x94D, 0x947, 0x644, 0x627, 0x1100, 0x1161};
  for (int it = 0; it < 500; ++it) {
    std::u32string s;
    const int len = static_cast<int>(rng.uniform_int(12));
    for (int i = 0; i < len; ++i) s.push_back(pool[rng.uniform_int(std::size(pool))]);
    std::u32string once = nfc(s);
    CHECK(nfc(once) == once);
  }
}

TEST_CASE("arabic presentation forms") {
  // beh has all four forms
  CHECK(arabic_presentation_form(0x628, ArabicForm::Isolated) == 0xFE8F);
  CHECK(arabic_presentation_form(0x628, ArabicForm::Final) == 0xFE90);
  CHECK(arabic_presentation_form(0x628, ArabicForm::Initial) == 0xFE91);
  CHECK(arabic_presentation_form(0x628, ArabicForm::Medial) == 0xFE92);
  // alef is right-joining: isolated/final only
  CHECK(arabic_presentation_form(0x627, ArabicForm::Isolated) == 0xFE8D);
  CHECK(arabic_presentation_form(0x627, ArabicForm::Final) == 0xFE8E);
  CHECK(arabic_presentation_form(0x627, ArabicForm::Medial) == 0);
  // the four mandatory lam-alef ligatures
  CHECK(lam_alef_ligature(0x627, false) == 0xFEFB);
  CHECK(lam_alef_ligature(0x627, true) == 0xFEFC);
  CHECK(lam_alef_ligature(0x622, false) == 0xFEF5);
  CHECK(lam_alef_ligature(0x623, true) == 0xFEF8);
  CHECK(lam_alef_ligature(0x625, false) == 0xFEF9);
  CHECK(lam_alef_ligature(0x648, false) == 0);  // waw is not an alef
}

}  // TEST_SUITE
