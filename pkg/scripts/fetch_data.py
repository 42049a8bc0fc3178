#!/usr/bin/env python3
"""Fetch and convert the five benchmark datasets into data/*.csv.

The waveform benchmark is synthetic and is generated locally from its
published recipe (deterministic under --seed). The other four are
downloaded from the UCI repository when the network allows and converted
from their native layouts to the uniform CSV this package reads:
a header row, float feature columns, and a final "class" column.

Conversions applied (see data/README.md for the full notes):
  breast-cancer: drop the leading sample-id column; class 2 -> benign,
                 4 -> malignant. Rows with '?' cells are kept verbatim;
                 the loader rejects and counts them.
  diabetes:      pima indians file used as-is; class 1 -> pos, 0 -> neg.
  vehicle:       the nine whitespace-separated xa*.dat parts are
                 concatenated; the trailing class token is kept.
  yeast:         whitespace-separated; the leading sequence-name column
                 is dropped.

Usage: python scripts/fetch_data.py [--out data] [--seed 0] [--rows 5000]
"""

import argparse
import csv
import io
import sys
import urllib.request
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from fuzzynet import dataio  # noqa: E402

UCI = "https://archive.ics.uci.edu/ml/machine-learning-databases"

BREAST_URL = f"{UCI}/breast-cancer-wisconsin/breast-cancer-wisconsin.data"
DIABETES_URL = f"{UCI}/pima-indians-diabetes/pima-indians-diabetes.data"
VEHICLE_URLS = [f"{UCI}/statlog/vehicle/xa{part}.dat" for part in "abcdefghi"]
YEAST_URL = f"{UCI}/yeast/yeast.data"


def fetch(url):
    print(f"  fetching {url}", file=sys.stderr)
    with urllib.request.urlopen(url, timeout=60) as response:
        return response.read().decode("utf-8", errors="replace")


def write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    print(f"  wrote {path} ({len(rows)} rows)", file=sys.stderr)


def convert_breast_cancer(out_dir):
    text = fetch(BREAST_URL)
    rows = []
    for line in text.splitlines():
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 11:
            continue
        label = {"2": "benign", "4": "malignant"}.get(parts[-1])
        if label is None:
            continue
        rows.append(parts[1:-1] + [label])
    header = ["clump_thickness", "cell_size_uniformity", "cell_shape_uniformity",
              "marginal_adhesion", "single_epithelial_size", "bare_nuclei",
              "bland_chromatin", "normal_nucleoli", "mitoses", "class"]
    write_csv(out_dir / "breast-cancer.csv", header, rows)


def convert_diabetes(out_dir):
    text = fetch(DIABETES_URL)
    rows = []
    for line in text.splitlines():
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 9:
            continue
        rows.append(parts[:-1] + [{"1": "pos", "0": "neg"}.get(parts[-1], parts[-1])])
    header = ["pregnancies", "glucose", "blood_pressure", "skin_thickness",
              "insulin", "bmi", "pedigree", "age", "class"]
    write_csv(out_dir / "diabetes.csv", header, rows)


def convert_vehicle(out_dir):
    rows = []
    for url in VEHICLE_URLS:
        for line in fetch(url).splitlines():
            parts = line.split()
            if len(parts) != 19:
                continue
            rows.append(parts)
    header = [f"f{i}" for i in range(18)] + ["class"]
    write_csv(out_dir / "vehicle.csv", header, rows)


def convert_yeast(out_dir):
    text = fetch(YEAST_URL)
    rows = []
    for line in text.splitlines():
        parts = line.split()
        if len(parts) != 10:
            continue
        rows.append(parts[1:])
    header = ["mcg", "gvh", "alm", "mit", "erl", "pox", "vac", "nuc", "class"]
    write_csv(out_dir / "yeast.csv", header, rows)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default="data")
    parser.add_argument("--seed", type=int, default=0, help="waveform generator seed")
    parser.add_argument("--rows", type=int, default=5000, help="waveform row count")
    parser.add_argument("--skip-downloads", action="store_true",
                        help="only generate the synthetic waveform file")
    args = parser.parse_args()
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    print("generating waveform locally", file=sys.stderr)
    dataio.save_csv(dataio.generate_waveform(args.rows, seed=args.seed),
                    out_dir / "waveform.csv")

    if args.skip_downloads:
        return 0
    failures = []
    for name, converter in [("breast-cancer", convert_breast_cancer),
                            ("diabetes", convert_diabetes),
                            ("vehicle", convert_vehicle),
                            ("yeast", convert_yeast)]:
        try:
            converter(out_dir)
        except OSError as exc:
            failures.append(name)
            print(f"  {name}: download failed ({exc})", file=sys.stderr)
    if failures:
        print(f"could not fetch: {', '.join(failures)}; the acceptance tests "
              "for those datasets will be skipped until the files exist",
              file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
