"""Generate the bundled sample images and sidecars under testdata/images.

Run once from frontend/: python3 tools/make_samples.py
Outputs are committed; this script only exists to document their provenance.
"""

import json
import math
from pathlib import Path

import numpy as np

from fusebench.geometry import write_pgm

OUT = Path(__file__).resolve().parent.parent / "testdata" / "images"
OUT.mkdir(parents=True, exist_ok=True)

H = W = 160


def face_like(seed, tilt_deg):
    """Smooth seeded texture with bright eye/nose blobs, tilted keypoints."""
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:H, 0:W].astype(float)
    img = 0.45 + 0.25 * np.sin(xx / rng.uniform(18, 30)) * np.cos(yy / rng.uniform(18, 30))
    base = {
        "left_eye": (60.0, 70.0),
        "right_eye": (100.0, 70.0),
        "nose_center": (80.0, 100.0),
        "left_eyebrow_center": (60.0, 55.0),
    }
    th = math.radians(tilt_deg)
    c, s = math.cos(th), math.sin(th)
    kp = {}
    for name, (x, y) in base.items():
        dx, dy = x - 80.0, y - 80.0
        kp[name] = (80.0 + c * dx - s * dy, 80.0 + s * dx + c * dy)
    for x, y in kp.values():
        img += 0.3 * np.exp(-((xx - x) ** 2 + (yy - y) ** 2) / 40.0)
    img += rng.normal(0.0, 0.02, size=img.shape)
    return np.clip(img, 0.0, 1.0), kp


SAMPLES = [
    ("S9000_a", 11, 6.0),
    ("S9000_b", 12, -4.0),
    ("S9001_a", 13, 2.5),
    # no keypoints sidecar on purpose: exercises the skip path
    ("S9002_a", 14, 0.0),
]

for stem, seed, tilt in SAMPLES:
    img, kp = face_like(seed, tilt)
    write_pgm(OUT / f"{stem}.pgm", img)
    if stem == "S9002_a":
        continue
    (OUT / f"{stem}.keypoints.json").write_text(
        json.dumps({k: list(v) for k, v in kp.items()}, indent=2) + "\n")
    lx, ly = kp["left_eye"]
    circles = {"pupil_center": [lx, ly], "pupil_radius": 6.0,
               "iris_center": [lx, ly], "iris_radius": 16.0}
    (OUT / f"{stem}.circles.json").write_text(json.dumps(circles, indent=2) + "\n")

print(f"wrote {len(SAMPLES)} images to {OUT}")
