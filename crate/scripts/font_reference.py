"""Dump reference glyph statistics for the bundled test font using fontTools.

The output is frozen into crates/core/tests/fixtures/font_reference.json and is
used as an independent oracle for the TrueType parser.
"""
import json
import sys

from fontTools.ttLib import TTFont

FONT = "crates/core/assets/glyphmotion-test-sans.ttf"
CHARS = "A o sleepyUIwakthnTé"


def dump(font, ch):
    glyf = font["glyf"]
    cmap = font.getBestCmap()
    name = cmap.get(ord(ch), ".notdef")
    glyph = glyf[name]
    coords, ends, flags = glyph.getCoordinates(glyf)
    contours = []
    start = 0
    for end in ends:
        contours.append(
            {
                "points": [list(map(int, p)) for p in coords[start : end + 1]],
                "on_curve": [bool(fl & 1) for fl in flags[start : end + 1]],
            }
        )
        start = end + 1
    explicit = 0
    for c in contours:
        on = c["on_curve"]
        n = len(on)
        explicit += n + sum(1 for k in range(n) if not on[k] and not on[(k + 1) % n])
    return {
        "glyph": name,
        "composite": glyph.isComposite(),
        "contours": len(contours),
        "points": sum(len(c["points"]) for c in contours),
        "explicit_points": explicit,
        "advance": font["hmtx"][name][0],
        "outline": contours,
    }


def main():
    font = TTFont(FONT)
    out = {
        "units_per_em": font["head"].unitsPerEm,
        "num_glyphs": font["maxp"].numGlyphs,
        "glyphs": {ch: dump(font, ch) for ch in CHARS},
    }
    json.dump(out, sys.stdout, indent=1, sort_keys=True)
    sys.stdout.write("\n")


if __name__ == "__main__":
    main()
