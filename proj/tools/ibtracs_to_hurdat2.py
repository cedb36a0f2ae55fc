#!/usr/bin/env python3
"""Write North Atlantic IBTrACS (WMO subset) storms in HURDAT2 text layout.

For the North Atlantic the WMO agency in IBTrACS is NHC, so positions and
maximum sustained winds are the HURDAT2 best-track values. The CSV layout
expected here is the offline "wmo" subset shipped with huracanpy:

    track_id,season,basin,time,lon,lat,wind,slp

A storm is kept when its first fix lies in the NA basin and its season is in
the requested range. Fields that the CSV does not carry are filled in:
storm numbers follow genesis order within a season, names are UNNAMED,
the status column is derived from wind (TD < 34 kt <= TS < 64 kt <= HU) and
wind radii are -999.
"""

import argparse
import csv
import sys
from collections import OrderedDict


def fmt_lat(lat):
    hemi = "N" if lat >= 0 else "S"
    return f"{abs(lat):.1f}{hemi}"


def fmt_lon(lon):
    if lon > 180.0:
        lon -= 360.0
    hemi = "E" if lon >= 0 else "W"
    return f"{abs(lon):.1f}{hemi}"


def status_for(wind):
    if wind < 0:
        return "  "
    if wind < 34:
        return "TD"
    if wind < 64:
        return "TS"
    return "HU"


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("csv_path")
    ap.add_argument("--first-year", type=int, default=2010)
    ap.add_argument("--last-year", type=int, default=2021)
    ap.add_argument("-o", "--output", default="-")
    args = ap.parse_args()

    tracks = OrderedDict()
    with open(args.csv_path, newline="") as fh:
        for row in csv.DictReader(fh):
            tracks.setdefault(row["track_id"], []).append(row)

    by_season = {}
    for tid, rows in tracks.items():
        season = int(rows[0]["season"])
        if rows[0]["basin"] != "NA":
            continue
        if not (args.first_year <= season <= args.last_year):
            continue
        rows.sort(key=lambda r: r["time"])
        by_season.setdefault(season, []).append((rows[0]["time"], tid, rows))

    out = sys.stdout if args.output == "-" else open(args.output, "w")
    radii = ", ".join(["-999"] * 12)
    for season in sorted(by_season):
        storms = sorted(by_season[season])
        for number, (_, _, rows) in enumerate(storms, start=1):
            sid = f"AL{number:02d}{season}"
            out.write(f"{sid},{'UNNAMED':>19},{len(rows):>7},\n")
            for r in rows:
                date = r["time"][0:10].replace("-", "")
                hhmm = r["time"][11:13] + r["time"][14:16]
                wind = int(float(r["wind"])) if r["wind"] else -99
                pres = int(float(r["slp"])) if r["slp"] else -999
                out.write(
                    f"{date}, {hhmm},  , {status_for(wind)}, "
                    f"{fmt_lat(float(r['lat'])):>5}, {fmt_lon(float(r['lon'])):>6}, "
                    f"{wind:>4}, {pres:>4}, {radii}, -999,\n"
                )
    if out is not sys.stdout:
        out.close()


if __name__ == "__main__":
    main()
