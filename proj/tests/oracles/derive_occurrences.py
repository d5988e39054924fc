#!/usr/bin/env python3
"""Brute-force count of tooltip anchors for a LaTeX document and a .kgt graph.

Works on the raw LaTeX: comments, commands, braces and the arguments of
reference-like commands are masked out, math is cut into its own regions,
and every item label / notation is searched with plain regular expressions.

    derive_occurrences.py DOC.tex GRAPH.kgt            # print the listing
    derive_occurrences.py DOC.tex GRAPH.kgt --check F  # compare with F
"""

import argparse
import re
import sys

SPACE = " \t\n\r\f\v"
MASK = "\0"
KEY_COMMANDS = {"label", "ref", "eqref", "cite", "begin", "end", "pageref"}
MATH_ENVS = {"equation", "equation*", "align", "align*", "gather", "gather*",
             "multline", "multline*", "eqnarray", "eqnarray*", "displaymath", "math"}
DELIM = re.compile(r"^[ \t]*%[ \t]*!snippet[ \t]+([0-9]+)[ \t]*$")


def unescape(field):
    out, i = [], 0
    while i < len(field):
        c = field[i]
        if c == "\\" and i + 1 < len(field):
            out.append({"t": "\t", "n": "\n", "r": "\r", "\\": "\\"}.get(field[i + 1], field[i + 1]))
            i += 2
        else:
            out.append(c)
            i += 1
    return "".join(out)


def read_items(path):
    items = []
    for line in open(path, encoding="utf-8").read().split("\n"):
        cols = line.split("\t")
        if len(cols) < 4 or cols[0] != "E" or cols[2] != "item":
            continue
        attrs = dict(c.split("=", 1) for c in cols[4:])
        if "src" not in attrs or "scope" in attrs:
            continue
        seq = int(re.search(r"(\d+)$", cols[1]).group(1))
        items.append({"uri": cols[1], "seq": seq, "label": unescape(cols[3]),
                      "notation": unescape(attrs["notation"]) if "notation" in attrs else None,
                      "src": int(attrs["src"])})
    return items


def split_snippets(tex):
    snippets, current = [], None
    pos = 0
    for line in tex.splitlines(keepends=True):
        m = DELIM.match(line.rstrip("\r\n"))
        if m:
            current = [int(m.group(1)), pos + len(line), pos + len(line)]
            snippets.append(current)
        elif current is not None:
            current[2] = pos + len(line)
        pos += len(line)
    return [(sid, tex[b:e]) for sid, b, e in snippets]


def regions(body):
    """Returns (masked_text, math_spans) where math_spans are content ranges."""
    text = list(body)
    math = []
    i, n = 0, len(body)

    def mask(a, b):
        for k in range(a, b):
            text[k] = MASK

    def skip_group(k):
        depth = 0
        while k < n:
            if body[k] == "\\":
                k += 2
                continue
            if body[k] == "{":
                depth += 1
            elif body[k] == "}":
                depth -= 1
                if depth == 0:
                    return k + 1
            k += 1
        return n

    while i < n:
        c = body[i]
        if c == "%":
            j = body.find("\n", i)
            j = n if j < 0 else j
            mask(i, j)
            i = j
        elif body.startswith("$$", i) or c == "$":
            d = "$$" if body.startswith("$$", i) else "$"
            j = body.find(d, i + len(d))
            math.append((i + len(d), j))
            mask(i, j + len(d))
            i = j + len(d)
        elif body.startswith("\\[", i) or body.startswith("\\(", i):
            close = "\\]" if body[i + 1] == "[" else "\\)"
            j = body.find(close, i + 2)
            math.append((i + 2, j))
            mask(i, j + 2)
            i = j + 2
        elif c == "\\":
            m = re.match(r"\\([A-Za-z]+)", body[i:])
            if not m:
                mask(i, i + 2)
                i += 2
                continue
            name = m.group(1)
            j = i + len(m.group(0))
            if name == "begin":
                env = re.match(r"\{([^}]*)\}", body[j:]).group(1)
                if env in MATH_ENVS:
                    end_tag = "\\end{" + env + "}"
                    k = body.find(end_tag, j)
                    start = j + len(env) + 2
                    math.append((start, k))
                    mask(i, k + len(end_tag))
                    i = k + len(end_tag)
                    continue
            if name in KEY_COMMANDS:
                while j < n and body[j] in " \t":
                    j += 1
                if j < n and body[j] == "{":
                    j = skip_group(j)
            mask(i, j)
            i = j
        elif c in "{}[]~":
            mask(i, i + 1)
            i += 1
        else:
            i += 1
    return "".join(text), math


def normalize_math(s):
    out, offsets = [], []
    i, control = 0, False
    while i < len(s):
        c = s[i]
        if c in SPACE:
            j = i
            while j < len(s) and s[j] in SPACE:
                j += 1
            if control and j < len(s) and s[j].isascii() and s[j].isalpha():
                out.append(" ")
                offsets.append(i)
            control = False
            i = j
            continue
        if c == "\\":
            out.append(c)
            offsets.append(i)
            i += 1
            if i < len(s) and s[i].isascii() and s[i].isalpha():
                while i < len(s) and s[i].isascii() and s[i].isalpha():
                    out.append(s[i])
                    offsets.append(i)
                    i += 1
                control = True
            elif i < len(s):
                out.append(s[i])
                offsets.append(i)
                i += 1
                control = False
            continue
        out.append(c)
        offsets.append(i)
        i += 1
        control = False
    return "".join(out), offsets


def is_word(c):
    return c.isalnum() or c == "_" or ord(c) >= 0x80


def letter(c):
    return c.isascii() and c.isalpha()


def digit(c):
    return c.isascii() and c.isdigit()


def label_regex(label):
    words = label.split()
    first = words[0]
    head = "[" + re.escape(first[0].lower()) + re.escape(first[0].upper()) + "]" + re.escape(first[1:])
    parts = [head] + [re.escape(w) for w in words[1:]]
    return re.compile("(?=(" + "[ \t\n\r\f\v]+".join(parts) + "))")


def candidates(body, items):
    masked, math = regions(body)
    found = []
    for it in items:
        label = " ".join(it["label"].split())
        for m in label_regex(label).finditer(masked):
            b, e = m.start(1), m.end(1)
            if re.search(r"\n[ \t\r]*\n", body[b:e]):
                continue
            if is_word(label[0]) and b > 0 and is_word(body[b - 1]):
                continue
            if is_word(label[-1]) and e < len(body) and is_word(body[e]):
                continue
            found.append((b, e, it))
        if not it["notation"]:
            continue
        note, _ = normalize_math(it["notation"])
        for a, z in math:
            s, offs = normalize_math(body[a:z])
            p = s.find(note)
            while p >= 0:
                q = p + len(note)
                ok = not (p > 0 and (s[p - 1] == "\\" or (letter(note[0]) and letter(s[p - 1]))
                                     or (digit(note[0]) and digit(s[p - 1]))))
                ok = ok and not (q < len(s) and ((letter(note[-1]) and letter(s[q]))
                                                 or (digit(note[-1]) and digit(s[q]))))
                if ok:
                    found.append((a + offs[p], a + offs[q - 1] + 1, it))
                p = s.find(note, p + 1)
    return found


def occurrences(tex, items):
    result = []
    for sid, body in split_snippets(tex):
        cands = sorted(candidates(body, items), key=lambda c: (-(c[1] - c[0]), c[0], c[2]["seq"]))
        kept = []
        for b, e, it in cands:
            if all(e <= kb or ke <= b for kb, ke, _ in kept):
                kept.append((b, e, it))
        for b, e, it in sorted(kept, key=lambda c: c[0]):
            if sid >= it["src"]:
                result.append(f"snippet {sid} [{b},{e}) {it['uri']}")
    return result


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("tex")
    ap.add_argument("graph")
    ap.add_argument("--check")
    args = ap.parse_args()
    lines = occurrences(open(args.tex, encoding="utf-8").read(), read_items(args.graph))
    listing = "\n".join(lines + [f"count {len(lines)}"]) + "\n"
    if args.check:
        expected = open(args.check, encoding="utf-8").read()
        if expected != listing:
            sys.stdout.write(listing)
            print("mismatch with " + args.check, file=sys.stderr)
            return 1
        print(f"ok: {len(lines)} occurrences")
        return 0
    sys.stdout.write(listing)
    return 0


if __name__ == "__main__":
    sys.exit(main())
