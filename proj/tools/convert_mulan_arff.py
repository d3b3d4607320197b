#!/usr/bin/env python3
"""Convert a MULAN-style multi-label ARFF dataset to the #ml text format.

MULAN distributions (http://mulan.sourceforge.net/datasets-mlc.html) ship an
ARFF file whose attributes mix numeric features with nominal {0,1} labels,
plus an XML header naming the label attributes. This script reads both and
writes:

    #ml C=<num labels> d=<num features>
    <comma-separated 0-based label ids> <feat>:<value> ...

one line per instance, zero-valued features omitted, values rendered with 17
significant digits. Instances without any positive label are written with an
empty label field; the dataset loader drops and counts them.

Example (Scene):
    python3 tools/convert_mulan_arff.py \
        --arff scene.arff --xml scene.xml --out data/scene.ml
"""

import argparse
import re
import sys
import xml.etree.ElementTree as ET


def parse_args():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--arff", required=True, help="ARFF file (dense or sparse data rows)")
    ap.add_argument("--xml", required=True, help="MULAN label-header XML file")
    ap.add_argument("--out", required=True, help="output .ml path")
    return ap.parse_args()


def read_label_names(xml_path):
    root = ET.parse(xml_path).getroot()
    names = []
    for node in root.iter():
        if node.tag.rsplit("}", 1)[-1] == "label":
            name = node.attrib.get("name")
            if name:
                names.append(name)
    if not names:
        sys.exit(f"error: no <label> entries found in {xml_path}")
    return names


_ATTR_RE = re.compile(r"@attribute\s+(?:'([^']*)'|\"([^\"]*)\"|(\S+))\s+", re.IGNORECASE)


def read_arff(path):
    """Returns (attribute_names, rows) with rows as dense lists of floats."""
    attributes = []
    rows = []
    in_data = False
    with open(path, "r", encoding="utf-8", errors="replace") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("%"):
                continue
            low = line.lower()
            if not in_data:
                if low.startswith("@attribute"):
                    m = _ATTR_RE.match(line)
                    if not m:
                        sys.exit(f"error: {path}:{lineno}: unparseable @attribute line")
                    attributes.append(next(g for g in m.groups() if g is not None))
                elif low.startswith("@data"):
                    in_data = True
                continue

            if line.startswith("{"):  # sparse row: {index value, index value, ...}
                row = [0.0] * len(attributes)
                body = line.strip("{}").strip()
                if body:
                    for pair in body.split(","):
                        idx_text, _, val_text = pair.strip().partition(" ")
                        idx = int(idx_text)
                        if not 0 <= idx < len(attributes):
                            sys.exit(f"error: {path}:{lineno}: sparse index {idx} out of range")
                        row[idx] = float(val_text)
                rows.append(row)
            else:
                values = [v.strip().strip("'\"") for v in line.split(",")]
                if len(values) != len(attributes):
                    sys.exit(
                        f"error: {path}:{lineno}: {len(values)} values for "
                        f"{len(attributes)} attributes"
                    )
                rows.append([float(v) for v in values])
    if not in_data:
        sys.exit(f"error: {path}: no @data section")
    return attributes, rows


def main():
    args = parse_args()
    label_names = read_label_names(args.xml)
    attributes, rows = read_arff(args.arff)

    name_to_col = {name: i for i, name in enumerate(attributes)}
    missing = [n for n in label_names if n not in name_to_col]
    if missing:
        sys.exit(f"error: labels {missing} from {args.xml} not present in {args.arff}")
    label_cols = [name_to_col[n] for n in label_names]
    label_col_set = set(label_cols)
    feature_cols = [i for i in range(len(attributes)) if i not in label_col_set]

    n_empty = 0
    with open(args.out, "w", encoding="utf-8") as out:
        out.write(f"#ml C={len(label_cols)} d={len(feature_cols)}\n")
        for row in rows:
            labels = [li for li, col in enumerate(label_cols) if row[col] > 0.5]
            if not labels:
                n_empty += 1
            fields = [",".join(str(li) for li in labels)]
            for fi, col in enumerate(feature_cols):
                if row[col] != 0.0:
                    fields.append(f"{fi}:{row[col]:.17g}")
            out.write(" ".join(fields).rstrip() + "\n")

    print(
        f"wrote {args.out}: n={len(rows)} C={len(label_cols)} d={len(feature_cols)}"
        + (f" ({n_empty} instances have no positive label)" if n_empty else "")
    )


if __name__ == "__main__":
    main()
