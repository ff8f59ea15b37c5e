#!/usr/bin/env python3
"""Regenerates data/aoi_regions.csv.

Eleven regions are centred on the ground track of the reference orbit
(500 km, 40 deg inclination, RAAN -75 deg, phase 0) at evenly spaced times
during the first orbit. Each region is a 3 x 15 grid (cross-track x
along-track). Priority and cloud cover are per region and representative,
not measured; eight of the eleven regions are cloudy, in line with the
global mean cloud fraction.
"""

import math
import sys

R_EARTH = 6378.137
MU = 398600.4418
W_EARTH = 7.2921150e-5

ALT_KM, INC_DEG, RAAN_DEG, PHASE_DEG = 500.0, 40.0, -75.0, 0.0
ALONG_STEP_DEG = 0.5
CROSS_STEP_DEG = 0.5
FIRST_CENTRE_S = 300.0
CENTRE_SPACING_S = 490.0

# (priority, cloud_cover) per region
REGIONS = [
    (0.85, 0.15), (0.40, 0.85), (0.30, 0.75), (0.75, 0.25), (0.30, 0.90), (0.45, 0.80),
    (0.35, 0.80), (0.70, 0.20), (0.40, 0.75), (0.25, 0.90), (0.50, 0.85),
]


def subsatellite(t):
    a = R_EARTH + ALT_KM
    n = math.sqrt(MU / a**3)
    u = math.radians(PHASE_DEG) + n * t
    o, i = math.radians(RAAN_DEG), math.radians(INC_DEG)
    x = a * (math.cos(o) * math.cos(u) - math.sin(o) * math.sin(u) * math.cos(i))
    y = a * (math.sin(o) * math.cos(u) + math.cos(o) * math.sin(u) * math.cos(i))
    z = a * math.sin(u) * math.sin(i)
    th = -W_EARTH * t
    xf, yf = math.cos(th) * x - math.sin(th) * y, math.sin(th) * x + math.cos(th) * y
    return math.degrees(math.asin(z / a)), math.degrees(math.atan2(yf, xf))


def wrap(lon):
    return (lon + 180.0) % 360.0 - 180.0


def main(out):
    out.write("region_id,lat_deg,lon_deg,priority,cloud_cover\n")
    for r, (q, sigma) in enumerate(REGIONS):
        tc = FIRST_CENTRE_S + r * CENTRE_SPACING_S
        lat0, lon0 = subsatellite(tc)
        lat1, lon1 = subsatellite(tc + 1.0)
        # local east/north unit heading of the ground track
        de = wrap(lon1 - lon0) * math.cos(math.radians(lat0))
        dn = lat1 - lat0
        h = math.hypot(de, dn)
        ae, an = de / h, dn / h  # along-track
        ce, cn = -an, ae  # cross-track
        for c in (-1, 0, 1):
            for k in range(-7, 8):
                e = k * ALONG_STEP_DEG * ae + c * CROSS_STEP_DEG * ce
                n = k * ALONG_STEP_DEG * an + c * CROSS_STEP_DEG * cn
                lat = lat0 + n
                lon = wrap(lon0 + e / math.cos(math.radians(lat0)))
                out.write(f"{r},{lat:.4f},{lon:.4f},{q:.2f},{sigma:.2f}\n")


if __name__ == "__main__":
    if len(sys.argv) > 1:
        with open(sys.argv[1], "w") as f:
            main(f)
    else:
        main(sys.stdout)
