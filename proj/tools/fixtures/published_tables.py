"""Extract the per-model result tables from a Markdown source into long-format CSVs."""
import csv
import re
import sys
from pathlib import Path

SPLITS = ["BD", "FF", "HD_COMB", "HD_NOVEL"]


def rows_between(text, start_label, end_marker=r"\end{tabular}"):
    start = text.index(start_label)
    end = text.index(end_marker, start)
    return text[start:end].splitlines()


def cells(line):
    line = line.split(r"\\")[0]
    return [c.strip() for c in line.split("&")]


def main_results(text):
    family = ""
    model = ""
    out = []
    for line in rows_between(text, r"\label{tab:bongard_results}"):
        m = re.match(r"\\multicolumn\{9\}\{l\}\{\\textit\{(.+?)\}\}", line.strip())
        if m:
            family = m.group(1).replace(" ", "")
            continue
        if "&" not in line or "Model" in line or "{$C$}" in line:
            continue
        c = cells(line)
        head = c[0]
        if head:
            m = re.search(r"\{\\textit\{(.+?)\}:(\w+)\}$", head) or re.search(r"\{\*\}\{(.+?)\}$", head)
            if m and m.lastindex == 2:
                family, size = m.group(1), m.group(2)
            else:
                size = m.group(1)
            model = f"{family}:{size}"
        exp = c[1]
        vals = c[2:]
        if exp.startswith("Baseline"):
            for split, v in zip(SPLITS, vals[1::2]):
                out.append((model, "Base", split, v))
            continue
        rep = "AD" if exp.startswith("Action Desc") else "AP"
        for i, split in enumerate(SPLITS):
            out.append((model, rep + "+C", split, vals[2 * i]))
            out.append((model, rep, split, vals[2 * i + 1]))
    return out


def grounded(text):
    out = []
    model = ""
    for line in rows_between(text, r"\label{tab:grounded_cg_models}"):
        if line.strip().startswith(r"\multirow"):
            model = re.search(r"\{\*\}\{(.+?)\}", line).group(1)
            continue
        if "&" not in line or "textbf" in line:
            continue
        c = cells(line)
        cond = "Grounded AD" if c[1].startswith("Action Desc") else "Grounded AP"
        for split, v in zip(SPLITS, c[2:]):
            out.append((model, cond, split, v))
    return out


def shuffle(text):
    out = []
    model = ""
    for line in rows_between(text, r"\label{tab:shuffle_detailed}"):
        if line.strip().startswith(r"\multirow"):
            model = re.search(r"\{\*\}\{(.+?)\}", line).group(1)
            continue
        if "&" not in line or "textbf" in line:
            continue
        c = cells(line)
        cond = "Categories Shuffle" if c[1].startswith("Categories") else "Test Sequence Shuffle"
        for split, v in zip(["BD", "FF"], c[2:]):
            out.append((model, cond, split, v))
    return out


def write(path, rows):
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["model", "condition", "split", "accuracy"])
        w.writerows(rows)


if __name__ == "__main__":
    source = Path(sys.argv[1]).read_text()
    out = Path(sys.argv[2])
    out.mkdir(parents=True, exist_ok=True)
    write(out / "main_results.csv", main_results(source))
    write(out / "grounded.csv", grounded(source))
    write(out / "shuffle.csv", shuffle(source))
