#!/usr/bin/env python3
"""Download and normalize the two UCI benchmark datasets.

Writes tests/data/internet_ads.csv and tests/data/amazon_reviews.csv in
the CSV dialect the package reads (comma-separated, header row, NA for
missing).  Normalization: cells are whitespace-stripped, "?" becomes NA,
and quantitative columns that are constant after cleaning are dropped
(they carry no variance and the pipeline rejects them by design).

Usage: python scripts/fetch_datasets.py [--dest tests/data]
"""

import argparse
import csv
import io
import sys
import urllib.request
import zipfile
from pathlib import Path

ADS_URL = "https://archive.ics.uci.edu/static/public/51/internet+advertisements.zip"
AMAZON_URL = "https://archive.ics.uci.edu/static/public/215/amazon+commerce+reviews+set.zip"


def download(url: str) -> bytes:
    print(f"downloading {url} ...")
    with urllib.request.urlopen(url) as resp:
        return resp.read()


def pick_member(zf: zipfile.ZipFile, suffixes: tuple[str, ...]) -> str:
    for name in zf.namelist():
        if name.lower().endswith(suffixes):
            return name
    raise SystemExit(f"no member with suffix {suffixes} in {zf.namelist()}")


def parse_rows(raw: str) -> list[list[str]]:
    """Parse .data/.csv/.arff content into stripped cell rows."""
    rows: list[list[str]] = []
    in_arff_header = raw.lstrip()[:1] == "@" or "@relation" in raw[:2000].lower()
    for line in raw.splitlines():
        line = line.strip()
        if not line:
            continue
        if in_arff_header:
            if line.lower().startswith("@data"):
                in_arff_header = False
            continue
        cells = [c.strip() for c in next(csv.reader([line]))]
        rows.append(cells)
    return rows


def normalize(rows: list[list[str]]) -> list[list[str]]:
    return [["NA" if c in ("?", "") else c for c in row] for row in rows]


def drop_constant_numeric_columns(rows: list[list[str]]) -> list[list[str]]:
    def observed(j):
        return {row[j] for row in rows if row[j] != "NA"}

    p = len(rows[0])
    keep = [j for j in range(p) if len(observed(j)) > 1]
    dropped = p - len(keep)
    if dropped:
        print(f"dropping {dropped} constant column(s)")
    return [[row[j] for j in keep] for row in rows]


def write(rows: list[list[str]], dest: Path) -> None:
    dest.parent.mkdir(parents=True, exist_ok=True)
    with open(dest, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"c{j}" for j in range(len(rows[0]))])
        writer.writerows(rows)
    print(f"wrote {dest} ({len(rows)} rows x {len(rows[0])} columns)")


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--dest", type=Path, default=Path("tests/data"))
    args = parser.parse_args()

    ads = zipfile.ZipFile(io.BytesIO(download(ADS_URL)))
    member = pick_member(ads, (".data",))
    rows = normalize(parse_rows(ads.read(member).decode("utf-8", "replace")))
    write(rows, args.dest / "internet_ads.csv")

    amazon = zipfile.ZipFile(io.BytesIO(download(AMAZON_URL)))
    member = pick_member(amazon, (".csv", ".arff", ".data"))
    rows = normalize(parse_rows(amazon.read(member).decode("utf-8", "replace")))
    rows = drop_constant_numeric_columns(rows)
    write(rows, args.dest / "amazon_reviews.csv")
    return 0


if __name__ == "__main__":
    sys.exit(main())
