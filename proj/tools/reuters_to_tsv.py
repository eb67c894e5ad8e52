#!/usr/bin/env python3
"""Converts the Reuters-21578 SGML distribution into winnowtc corpus files.

    reuters_to_tsv.py REUTERS_DIR OUT_DIR [--split apte|lewis] [--min-docs N]

Writes OUT_DIR/train.tsv and OUT_DIR/test.tsv (`id TAB labels TAB text`).
The apte split keeps documents with TOPICS="YES" and uses LEWISSPLIT for
train/test; categories without a document on both sides are dropped.
The lewis split keeps every document LEWISSPLIT assigns to either side.
"""
import argparse
import glob
import html
import os
import re
import sys

DOC = re.compile(r"<REUTERS(?P<attrs>[^>]*)>(?P<body>.*?)</REUTERS>", re.S)
ATTR = re.compile(r'(\w+)="([^"]*)"')
TOPICS = re.compile(r"<TOPICS>(.*?)</TOPICS>", re.S)
D = re.compile(r"<D>(.*?)</D>", re.S)
TITLE = re.compile(r"<TITLE>(.*?)</TITLE>", re.S)
BODY = re.compile(r"<BODY>(.*?)</BODY>", re.S)


def escape(text):
    return text.replace("\\", "\\\\").replace("\t", "\\t").replace("\n", "\\n").replace("\r", "\\r")


def parse(path):
    with open(path, encoding="latin-1") as f:
        data = f.read()
    for m in DOC.finditer(data):
        attrs = dict(ATTR.findall(m.group("attrs")))
        body = m.group("body")
        topics = TOPICS.search(body)
        labels = D.findall(topics.group(1)) if topics else []
        parts = [p.group(1) for p in (TITLE.search(body), BODY.search(body)) if p]
        text = html.unescape(" ".join(parts)).replace("\x03", " ")
        yield attrs, labels, " ".join(text.split())


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("reuters_dir")
    ap.add_argument("out_dir")
    ap.add_argument("--split", choices=["apte", "lewis"], default="apte")
    ap.add_argument("--min-docs", type=int, default=1, help="per side, for a category to be kept")
    args = ap.parse_args()

    files = sorted(glob.glob(os.path.join(args.reuters_dir, "reut2-*.sgm")))
    if not files:
        sys.exit(f"error: no reut2-*.sgm files in {args.reuters_dir}")

    sides = {"TRAIN": [], "TEST": []}
    for path in files:
        for attrs, labels, text in parse(path):
            side = attrs.get("LEWISSPLIT")
            if side not in sides:
                continue
            if args.split == "apte" and attrs.get("TOPICS") != "YES":
                continue
            sides[side].append((attrs.get("NEWID", ""), labels, text))

    def counts(docs):
        c = {}
        for _, labels, _ in docs:
            for l in labels:
                c[l] = c.get(l, 0) + 1
        return c

    train_counts, test_counts = counts(sides["TRAIN"]), counts(sides["TEST"])
    keep = {l for l in train_counts if train_counts[l] >= args.min_docs and test_counts.get(l, 0) >= args.min_docs}

    os.makedirs(args.out_dir, exist_ok=True)
    for side, name in (("TRAIN", "train.tsv"), ("TEST", "test.tsv")):
        with open(os.path.join(args.out_dir, name), "w", encoding="utf-8", newline="\n") as out:
            for doc_id, labels, text in sides[side]:
                kept = sorted(l for l in labels if l in keep)
                out.write(f"{doc_id}\t{','.join(kept)}\t{escape(text)}\n")
    print(f"{len(sides['TRAIN'])} train, {len(sides['TEST'])} test documents, {len(keep)} categories", file=sys.stderr)


if __name__ == "__main__":
    main()
