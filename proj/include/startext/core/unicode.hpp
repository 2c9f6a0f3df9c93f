#pragma once

#include <string>

namespace startext {

// Canonical composition (NFC): decompose, reorder combining marks, compose.
// Hangul is handled algorithmically; everything else uses tables generated
// from the UCD (see tools/gen_unicode_tables.py).
std::u32string nfc(const std::u32string& s);

// Convenience: UTF-8 in, NFC-normalized UTF-8 out. Throws ValidationError
// on malformed UTF-8.
std::string nfc_utf8(const std::string& s);

// Canonical combining class (0 for starters).
int combining_class(char32_t cp);

// Arabic joining form, in the order used by the presentation-form table.
enum class ArabicForm { Isolated = 0, Final = 1, Initial = 2, Medial = 3 };

// Presentation-form codepoint for (base letter, form), or 0 if the UCD has
// none (e.g. a right-joining letter asked for a medial form).
char32_t arabic_presentation_form(char32_t base, ArabicForm form);

// Mandatory lam-alef ligature for lam + alef_variant, or 0 if alef_variant
// is not one of U+0622/0623/0625/0627. `joined_before` selects the final
// (connected) variant over the isolated one.
char32_t lam_alef_ligature(char32_t alef_variant, bool joined_before);

}  // namespace startext
