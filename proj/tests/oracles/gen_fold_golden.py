#!/usr/bin/env python3
"""Unicode-NFD oracle for diacritic folding.

For each codepoint in the Latin-1 Supplement / Latin Extended-A..B range,
the expected fold target is the first character of its NFD decomposition
when that character is an ASCII letter; everything else must pass through
unchanged. Output: "<hex codepoint>\t<folded char or '='>" per line.
"""
import sys
import unicodedata

out = sys.stdout
for cp in range(0xC0, 0x250):
    d = unicodedata.normalize('NFD', chr(cp))
    if len(d) >= 2 and ord(d[0]) < 128 and d[0].isalpha():
        out.write(f"{cp:04X}\t{d[0]}\n")
    else:
        out.write(f"{cp:04X}\t=\n")
