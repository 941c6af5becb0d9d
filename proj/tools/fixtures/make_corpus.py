"""Build the small upstream-layout fixture corpus under data/fixtures/upstream.

Eight problems (two per split). The first BD problem uses the worked example
programs as its first positive and first negative image.
"""
import json
import math
import random
import sys
from pathlib import Path

from PIL import Image, ImageDraw

STYLES = ["normal", "zigzag", "triangle", "square", "circle"]

A1_NEG = ["line_normal_0.300-0.500", "line_normal_0.424-0.875", "line_normal_0.300-0.875",
          "line_normal_0.800-0.167", "line_normal_0.800-0.833", "line_normal_0.800-0.833",
          "line_normal_0.200-0.500", "arc_zigzag_0.500_0.625-0.500", "line_normal_0.400-0.500",
          "arc_triangle_0.500_0.625-0.500", "line_normal_0.200-0.500", "arc_triangle_0.500_0.625-0.500",
          "line_triangle_0.400-0.500", "arc_normal_0.500_0.625-0.500"]
A1_POS = ["line_normal_1.000-0.500", "line_normal_0.283-0.875", "line_normal_0.200-0.875",
          "line_normal_0.583-0.086", "line_normal_0.500-0.664", "line_normal_0.500-0.750",
          "line_square_0.200-0.500", "arc_triangle_0.500_0.625-0.500", "line_normal_0.400-0.500",
          "arc_square_0.500_0.625-0.500", "line_circle_0.200-0.500", "arc_normal_0.500_0.625-0.500",
          "line_triangle_0.400-0.500", "arc_triangle_0.500_0.625-0.500"]
A1_CONCEPT = "unbalanced trapezoid right_triangle AND uneven band four arcs"


def line(style, length, turn):
    return f"line_{style}_{length / 1000:.3f}-{turn / 1000:.3f}"


def arc(style, radius, sweep, turn):
    return f"arc_{style}_{radius / 1000:.3f}_{sweep / 1000:.3f}-{turn / 1000:.3f}"


def restyle(tokens, rng, start):
    out = []
    for i, tok in enumerate(tokens):
        if i >= start:
            kind, _, rest = tok.split("_", 2)
            tok = f"{kind}_{rng.choice(STYLES)}_{rest}"
        out.append(tok)
    return out


def split_a1(tokens):
    return [tokens[:3], tokens[3:6], tokens[6:]]


def a1_problem(rng):
    pos = [split_a1(A1_POS)]
    neg = [split_a1(A1_NEG)]
    while len(pos) < 7:
        img = split_a1(restyle(A1_POS, rng, 6))
        if img not in pos:
            pos.append(img)
    while len(neg) < 7:
        img = split_a1(restyle(A1_NEG, rng, 6))
        if img not in neg:
            neg.append(img)
    return pos, neg


def polygon(n_sides, side, style):
    turn = 500 + round(360 / n_sides * 1000 / 360)
    return [line(style, side, turn) for _ in range(n_sides)]


def random_stroke(rng, n):
    toks = []
    for _ in range(n):
        if rng.random() < 0.4:
            toks.append(arc(rng.choice(STYLES), rng.choice([250, 300, 400, 500]), rng.choice([375, 625, 750]),
                            rng.choice([500, 250, 750, 625])))
        else:
            toks.append(line(rng.choice(STYLES), rng.choice([200, 300, 400, 500, 600]),
                             rng.choice([500, 250, 750, 375, 625])))
    return toks


def planted_problem(rng, make_pos, make_neg):
    pos, neg = [], []
    while len(pos) < 7:
        img = make_pos(rng)
        if img not in pos:
            pos.append(img)
    while len(neg) < 7:
        img = make_neg(rng)
        if img not in neg and img not in pos:
            neg.append(img)
    return pos, neg


def build(rng):
    problems = {}
    problems["bd_right_triangle_band_0000"] = ("bd", *a1_problem(rng), A1_CONCEPT)
    problems["bd_triangle_vs_square_0001"] = (
        "bd",
        *planted_problem(rng,
                         lambda r: [polygon(3, r.choice([300, 400, 500]), r.choice(STYLES)), random_stroke(r, 2)],
                         lambda r: [polygon(4, r.choice([300, 400, 500]), r.choice(STYLES)), random_stroke(r, 2)]),
        "equilateral_triangle")
    problems["ff_nact4_0000"] = (
        "ff",
        *planted_problem(rng,
                         lambda r: [random_stroke(r, 2) + [arc("normal", 500, 750, 500)] + random_stroke(r, 1)],
                         lambda r: [random_stroke(r, 2) + [line("normal", 500, 750)] + random_stroke(r, 1)]),
        "free-form shape with a half-circle arc")
    problems["ff_nact5_0001"] = (
        "ff",
        *planted_problem(rng,
                         lambda r: [[line("zigzag", 400, 625)] + random_stroke(r, 4)],
                         lambda r: [[line("circle", 400, 375)] + random_stroke(r, 4)]),
        "free-form shape starting with a zigzag stroke")
    problems["hd_fan_0000"] = (
        "hd",
        *planted_problem(rng,
                         lambda r: [[arc(r.choice(STYLES), 400, 750, 750)] * 3, random_stroke(r, 1)],
                         lambda r: [[arc(r.choice(STYLES), 400, 625, 750)] * 3, random_stroke(r, 1)]),
        "fan of three half arcs")
    problems["hd_zigzag_square_0001"] = (
        "hd",
        *planted_problem(rng,
                         lambda r: [polygon(4, 400, "zigzag"), random_stroke(r, 2)],
                         lambda r: [polygon(4, 400, "normal"), random_stroke(r, 2)]),
        "square drawn with zigzag strokes")
    problems["hd_novel_star_0002"] = (
        "hd",
        *planted_problem(rng,
                         lambda r: [[line(r.choice(STYLES), 500, 900) for _ in range(5)]],
                         lambda r: [[line(r.choice(STYLES), 500, 700) for _ in range(5)]]),
        "five-pointed star")
    problems["hd_novel_spiral_0003"] = (
        "hd",
        *planted_problem(rng,
                         lambda r: [[arc("normal", rad, 750, 500) for rad in (200, 300, 400)] + random_stroke(r, 1)],
                         lambda r: [[arc("normal", 300, 750, 500) for _ in range(3)] + random_stroke(r, 1)]),
        "spiral of growing arcs")
    return problems


def trace(image, scale=40.0, size=128):
    """Polylines of an image under the turtle conventions (heading 0 = up, CCW positive)."""
    lines = []
    for shape in image:
        x, y, heading = size / 2, size / 2, 0.0
        pts = [(x, y)]
        for tok in shape:
            head, turn = tok.rsplit("-", 1)
            parts = head.split("_")
            if parts[0] == "line":
                length = float(parts[-1]) * scale
                h = math.radians(heading)
                x, y = x - math.sin(h) * length, y - math.cos(h) * length
                pts.append((x, y))
            else:
                radius, sweep = float(parts[-2]) * scale, (float(parts[-1]) - 0.5) * 720
                steps = max(2, int(abs(sweep) / 10))
                for _ in range(steps):
                    heading += sweep / steps
                    h = math.radians(heading)
                    chord = 2 * radius * math.sin(math.radians(abs(sweep / steps)) / 2)
                    x, y = x - math.sin(h) * chord, y - math.cos(h) * chord
                    pts.append((x, y))
            heading += (float(turn) - 0.5) * 360
        lines.append(pts)
    return lines


def write_png(path, image):
    path.parent.mkdir(parents=True, exist_ok=True)
    canvas = Image.new("L", (128, 128), 255)
    draw = ImageDraw.Draw(canvas)
    for pts in trace(image):
        draw.line(pts, fill=0, width=2)
    canvas.save(path, optimize=True)


def main(out):
    rng = random.Random(20240611)
    problems = build(rng)
    by_split = {"bd": {}, "ff": {}, "hd": {}}
    for pid, (split, pos, neg, _) in problems.items():
        by_split[split][pid] = [pos, neg]
    for split, entries in by_split.items():
        d = out / split
        d.mkdir(parents=True, exist_ok=True)
        (d / f"{split}_action_programs.json").write_text(json.dumps(entries, indent=1) + "\n")
        for pid, (pos, neg) in entries.items():
            for label, images in (("1", pos), ("0", neg)):
                for k, img in enumerate(images):
                    write_png(d / "images" / pid / label / f"{k}.png", img)
    split_doc = {
        "train": [],
        "val": [],
        "test_bd": [p for p in problems if p.startswith("bd")],
        "test_ff": [p for p in problems if p.startswith("ff")],
        "test_hd_comb": ["hd_fan_0000", "hd_zigzag_square_0001"],
        "test_hd_novel": ["hd_novel_star_0002", "hd_novel_spiral_0003"],
    }
    (out / "ShapeBongard_V2_split.json").write_text(json.dumps(split_doc, indent=1) + "\n")
    (out / "concepts.json").write_text(json.dumps({p: v[3] for p, v in problems.items()}, indent=1) + "\n")


if __name__ == "__main__":
    main(Path(sys.argv[1]))
