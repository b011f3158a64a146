#!/usr/bin/env python3
"""Reference short-form scorer used to freeze tests/acceptance/scorer_cases.inc.

Normalization follows the usual SQuAD evaluation script; an empty
prediction against an empty gold scores F1 = 1.
"""

import collections
import re
import string
import sys

CASES = [
    ("Sir Nicholas Bacon", ["Sir Nicholas Bacon"]),
    ("sir nicholas bacon.", ["Sir Nicholas Bacon"]),
    ("Nicholas Bacon", ["Sir Nicholas Bacon"]),
    ("The Sir Nicholas Bacon", ["Sir Nicholas Bacon"]),
    ("Bacon", ["Sir Nicholas Bacon"]),
    ("Francis Bacon", ["Sir Nicholas Bacon"]),
    ("Paris", ["Paris"]),
    ("paris!", ["Paris"]),
    ("the Paris", ["Paris"]),
    ("Paris, France", ["Paris"]),
    ("London", ["Paris"]),
    ("", ["Paris"]),
    ("", [""]),
    ("the", [""]),
    ("a an the", ["The"]),
    ("1966", ["1966"]),
    ("In 1966", ["1966"]),
    ("1966.", ["1966"]),
    ("19 66", ["1966"]),
    ("Eric Hall", ["Eric Hall"]),
    ("eric   hall", ["Eric Hall"]),
    ("Hall, Eric", ["Eric Hall"]),
    ("Eric", ["Eric Hall"]),
    ("Mr. Eric Hall", ["Eric Hall"]),
    ("Albrecht Durer the Elder", ["Albrecht Durer the Elder"]),
    ("Albrecht Durer", ["Albrecht Durer the Elder"]),
    ("Durer's father", ["Albrecht Durer the Elder", "Durer's father"]),
    ("Durers father", ["Durer's father"]),
    ("his father", ["Durer's father"]),
    ("Head I", ["Head I"]),
    ("head i", ["Head I"]),
    ("Head II", ["Head I"]),
    ("blue green", ["green blue"]),
    ("green green blue", ["green blue"]),
    ("green", ["green green"]),
    ("a cat sat on the mat", ["the cat sat on a mat"]),
    ("cat sat mat", ["cat sat on mat"]),
    ("the quick brown fox", ["quick brown fox jumps"]),
    ("yes", ["no", "yes"]),
    ("no", ["yes"]),
    ("New York City", ["New York", "NYC"]),
    ("NYC", ["New York", "NYC"]),
    ("U.S.A.", ["USA"]),
    ("U.S.A.", ["U S A"]),
    ("well-known", ["wellknown"]),
    ("well known", ["well-known"]),
    ("(a) first", ["first"]),
    ("\"quoted\" answer", ["quoted answer"]),
    ("Answer: 42", ["42"]),
    ("forty two", ["42"]),
]


def normalize(s):
    s = s.lower()
    s = "".join(ch for ch in s if ch not in set(string.punctuation))
    s = re.sub(r"\b(a|an|the)\b", " ", s)
    return " ".join(s.split())


def f1(pred, gold):
    p = normalize(pred).split()
    g = normalize(gold).split()
    if not p or not g:
        return float(p == g)
    common = collections.Counter(p) & collections.Counter(g)
    same = sum(common.values())
    if same == 0:
        return 0.0
    precision = same / len(p)
    recall = same / len(g)
    return 2 * precision * recall / (precision + recall)


def em(pred, gold):
    return float(normalize(pred) == normalize(gold))


def cxx_string(s):
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def main():
    out = sys.stdout
    out.write("// Generated by tools/squad_oracle.py\n")
    for pred, golds in CASES:
        e = max(em(pred, g) for g in golds)
        f = max(f1(pred, g) for g in golds)
        gold_list = ", ".join(cxx_string(g) for g in golds)
        out.write(f"{{{cxx_string(pred)}, {{{gold_list}}}, {e:.1f}, {f!r}}},\n")


if __name__ == "__main__":
    main()
