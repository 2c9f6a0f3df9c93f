#!/usr/bin/env python3
"""Regenerates src/core/unicode_data.inc from the Python unicodedata module.

Emits three binary-search tables used by the NFC normalizer:
  - full canonical (NFD) expansions for every codepoint whose NFD differs
    from itself (Hangul syllables excluded, they are decomposed
    algorithmically at runtime),
  - nonzero canonical combining classes,
  - primary composition pairs (exclusions filtered by round-tripping
    through unicodedata.normalize),
plus the Arabic presentation-form table (base letter + joining form ->
presentation codepoint, and the four mandatory lam-alef ligatures) pulled
from the compatibility decomposition tags.

Usage: python3 tools/gen_unicode_tables.py > src/core/unicode_data.inc
"""

import sys
import unicodedata

HANGUL_FIRST, HANGUL_LAST = 0xAC00, 0xD7A3

FORM_TAGS = {"<isolated>": 0, "<final>": 1, "<initial>": 2, "<medial>": 3}


def codepoints():
    for cp in range(0x110000):
        if 0xD800 <= cp <= 0xDFFF:
            continue
        yield cp


def main():
    nfd_index = []  # (cp, offset, len)
    nfd_data = []
    ccc = []
    compose = []
    arab_forms = []  # (base, form, presentation)
    lam_alef = []  # (alef, isolated, final)

    for cp in codepoints():
        ch = chr(cp)
        if not (HANGUL_FIRST <= cp <= HANGUL_LAST):
            d = unicodedata.normalize("NFD", ch)
            if d != ch:
                nfd_index.append((cp, len(nfd_data), len(d)))
                nfd_data.extend(ord(c) for c in d)
        c = unicodedata.combining(ch)
        if c:
            ccc.append((cp, c))
        dec = unicodedata.decomposition(ch)
        if dec and not dec.startswith("<"):
            parts = [int(p, 16) for p in dec.split()]
            if len(parts) == 2 and unicodedata.combining(chr(parts[0])) == 0:
                if unicodedata.normalize("NFC", chr(parts[0]) + chr(parts[1])) == ch:
                    compose.append((parts[0], parts[1], cp))
        if 0xFB50 <= cp <= 0xFEFF and dec:
            fields = dec.split()
            if fields and fields[0] in FORM_TAGS:
                base = [int(p, 16) for p in fields[1:]]
                form = FORM_TAGS[fields[0]]
                if len(base) == 1:
                    arab_forms.append((base[0], form, cp))
                elif (
                    len(base) == 2
                    and base[0] == 0x0644
                    and 0xFEF5 <= cp <= 0xFEFC
                    and form <= 1
                ):
                    # the four mandatory lam-alef ligatures, isolated/final
                    lam_alef.append((base[1], form, cp))

    compose.sort()
    lig = {}
    for alef, form, cp in lam_alef:
        lig.setdefault(alef, [0, 0])[form] = cp

    out = sys.stdout
    out.write("// Generated by tools/gen_unicode_tables.py -- do not edit.\n")
    out.write("// Data source: Python unicodedata (UCD %s).\n\n" % unicodedata.unidata_version)

    out.write("static constexpr NfdEntry kNfdIndex[] = {\n")
    for cp, off, n in nfd_index:
        out.write("  {0x%X,%d,%d},\n" % (cp, off, n))
    out.write("};\n\n")

    out.write("static constexpr char32_t kNfdData[] = {\n")
    for i in range(0, len(nfd_data), 12):
        out.write("  " + ",".join("0x%X" % v for v in nfd_data[i : i + 12]) + ",\n")
    out.write("};\n\n")

    out.write("static constexpr CccEntry kCcc[] = {\n")
    for cp, c in ccc:
        out.write("  {0x%X,%d},\n" % (cp, c))
    out.write("};\n\n")

    out.write("static constexpr ComposeEntry kCompose[] = {\n")
    for a, b, c in compose:
        out.write("  {0x%X,0x%X,0x%X},\n" % (a, b, c))
    out.write("};\n\n")

    out.write("static constexpr ArabicFormEntry kArabicForms[] = {\n")
    for base, form, cp in sorted(arab_forms):
        out.write("  {0x%X,%d,0x%X},\n" % (base, form, cp))
    out.write("};\n\n")

    out.write("static constexpr LamAlefEntry kLamAlef[] = {\n")
    for alef in sorted(lig):
        iso, fin = lig[alef]
        out.write("  {0x%X,0x%X,0x%X},\n" % (alef, iso, fin))
    out.write("};\n")


if __name__ == "__main__":
    main()
