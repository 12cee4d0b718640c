#!/usr/bin/env python3
"""Fetch and prepare the public datasets used by the shipped audit configs.

Produces:
  data/compas_prepared.csv       columns: age, priors_count, race_black,
                                 two_year_recid, decile_score (7,214 rows)
  data/communities_prepared.csv  all complete predictive columns plus
                                 majority_white and violent_crime_rate (1,994 rows)

Needs network access to raw.githubusercontent.com and archive.ics.uci.edu.
Already-downloaded raw files can be supplied with --compas-file /
--communities-data / --communities-names to run fully offline.
"""

import argparse
import csv
import io
import os
import sys
import urllib.request

COMPAS_URL = (
    "https://raw.githubusercontent.com/propublica/compas-analysis/master/"
    "compas-scores-two-years.csv"
)
COMMUNITIES_DATA_URL = (
    "https://archive.ics.uci.edu/ml/machine-learning-databases/communities/communities.data"
)
COMMUNITIES_NAMES_URL = (
    "https://archive.ics.uci.edu/ml/machine-learning-databases/communities/communities.names"
)

EXPECTED_COMPAS_ROWS = 7214
EXPECTED_COMMUNITIES_ROWS = 1994


def fetch(url):
    print(f"downloading {url}")
    with urllib.request.urlopen(url) as resp:
        return resp.read().decode("utf-8")


def read_or_fetch(path, url):
    if path:
        with open(path, "r", encoding="utf-8") as f:
            return f.read()
    return fetch(url)


def prepare_compas(raw_text, out_path):
    """Two-year recidivism table, one row per defendant.

    The audit uses the full 7,214-row file (no further cleaning filter): age and
    prior count as features, black vs non-black as the attribute, the two-year
    recidivism flag as the outcome, and the decile score as the benchmark column.
    """
    reader = csv.reader(io.StringIO(raw_text))
    header = next(reader)
    # The upstream file repeats some column names; take the first occurrence.
    idx = {}
    for pos, name in enumerate(header):
        idx.setdefault(name, pos)
    for needed in ("age", "priors_count", "two_year_recid", "decile_score", "race"):
        if needed not in idx:
            raise SystemExit(f"compas: column '{needed}' not found")

    rows = []
    for i, row in enumerate(reader):
        if not row:
            continue
        try:
            age = int(row[idx["age"]])
            priors = int(row[idx["priors_count"]])
            recid = int(row[idx["two_year_recid"]])
            decile = int(row[idx["decile_score"]])
        except (IndexError, ValueError) as e:
            raise SystemExit(f"compas row {i}: unparseable field ({e})")
        if recid not in (0, 1):
            raise SystemExit(f"compas row {i}: two_year_recid must be 0/1")
        if not 1 <= decile <= 10:
            raise SystemExit(f"compas row {i}: decile_score out of range")
        black = 1 if row[idx["race"]] == "African-American" else 0
        rows.append((age, priors, black, recid, decile))

    if len(rows) != EXPECTED_COMPAS_ROWS:
        raise SystemExit(
            f"expected {EXPECTED_COMPAS_ROWS} COMPAS rows, got {len(rows)}; "
            "the upstream file may have changed"
        )
    with open(out_path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["age", "priors_count", "race_black", "two_year_recid", "decile_score"])
        w.writerows(rows)
    print(f"wrote {out_path} ({len(rows)} rows)")


def parse_communities_names(names_text):
    cols = []
    for line in names_text.splitlines():
        line = line.strip()
        if line.lower().startswith("@attribute"):
            cols.append(line.split()[1])
    if len(cols) != 128:
        raise SystemExit(f"expected 128 attribute declarations, got {len(cols)}")
    return cols


def prepare_communities(data_text, names_text, out_path):
    """Violent-crime regression table.

    Drops the five non-predictive identifier columns and every column containing
    a missing value marker; the attribute is majority_white (normalized
    racePctWhite above 0.5) and the target is ViolentCrimesPerPop.
    """
    cols = parse_communities_names(names_text)
    non_predictive = {"state", "county", "community", "communityname", "fold"}
    target = "ViolentCrimesPerPop"

    rows = [r for r in csv.reader(io.StringIO(data_text)) if r]
    if len(rows) != EXPECTED_COMMUNITIES_ROWS:
        raise SystemExit(
            f"expected {EXPECTED_COMMUNITIES_ROWS} communities rows, got {len(rows)}"
        )

    missing = set()
    for r in rows:
        if len(r) != len(cols):
            raise SystemExit("communities row width does not match the names file")
        for c, v in zip(cols, r):
            if v.strip() == "?":
                missing.add(c)

    keep = [
        c
        for c in cols
        if c not in non_predictive and c not in missing and c != target
    ]
    if "racePctWhite" not in keep:
        raise SystemExit("racePctWhite unexpectedly missing; cannot derive the attribute")
    if target in missing:
        raise SystemExit("target column has missing values")

    col_index = {c: i for i, c in enumerate(cols)}
    with open(out_path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(keep + ["majority_white", "violent_crime_rate"])
        for r in rows:
            values = [r[col_index[c]] for c in keep]
            majority_white = 1 if float(r[col_index["racePctWhite"]]) > 0.5 else 0
            w.writerow(values + [majority_white, r[col_index[target]]])
    print(f"wrote {out_path} ({len(rows)} rows, {len(keep)} feature columns)")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--outdir", default="data")
    ap.add_argument("--compas-file", help="local compas-scores-two-years.csv")
    ap.add_argument("--communities-data", help="local communities.data")
    ap.add_argument("--communities-names", help="local communities.names")
    ap.add_argument("--skip-compas", action="store_true")
    ap.add_argument("--skip-communities", action="store_true")
    args = ap.parse_args()

    os.makedirs(args.outdir, exist_ok=True)
    if not args.skip_compas:
        raw = read_or_fetch(args.compas_file, COMPAS_URL)
        prepare_compas(raw, os.path.join(args.outdir, "compas_prepared.csv"))
    if not args.skip_communities:
        data = read_or_fetch(args.communities_data, COMMUNITIES_DATA_URL)
        names = read_or_fetch(args.communities_names, COMMUNITIES_NAMES_URL)
        prepare_communities(
            data, names, os.path.join(args.outdir, "communities_prepared.csv")
        )
    print("done")


if __name__ == "__main__":
    sys.exit(main())
