"""Geometry stage on a synthetic face-like image.

Builds a tilted synthetic image, normalizes its rotation from the eye
keypoints, crops trait regions scaled by inter-eye distance, and unwraps
a synthetic iris annulus into the fixed-size rectangle with its mask.
"""

import math

import numpy as np

from fusebench.geometry import (FaceKeypoints, IrisCircles, crop,
                                normalize_rotation, rubber_sheet,
                                split_subimages, trait_crop_spec)

rng = np.random.default_rng(0)
img = rng.uniform(0.2, 0.8, size=(240, 240))

# keypoints tilted by 15 degrees around (120, 110)
theta = math.radians(15)
c, s = math.cos(theta), math.sin(theta)


def tilt(p, center=(120.0, 110.0)):
    dx, dy = p[0] - center[0], p[1] - center[1]
    return (center[0] + c * dx - s * dy, center[1] + s * dx + c * dy)


kp = FaceKeypoints(left_eye=tilt((90.0, 110.0)), right_eye=tilt((150.0, 110.0)),
                   nose_center=tilt((120.0, 150.0)),
                   left_eyebrow_center=tilt((90.0, 90.0)))
print(f"tilt angle before: {math.degrees(math.atan2(kp.right_eye[1] - kp.left_eye[1], kp.right_eye[0] - kp.left_eye[0])):.1f} deg")

level, kp2 = normalize_rotation(img, kp)
print(f"eye dy after normalization: {abs(kp2.left_eye[1] - kp2.right_eye[1]):.4f} px")

for trait in ("periocular", "nose", "eyebrow"):
    spec = trait_crop_spec(trait, kp2)
    window, clipped = crop(level, spec)
    print(f"{trait:<10} crop {window.shape[1]}x{window.shape[0]} "
          f"at {tuple(round(v) for v in spec.center)}, clipped {clipped:.2f}")

circles = IrisCircles(pupil_center=(120.0, 110.0), pupil_radius=10.0,
                      iris_center=(120.0, 110.0), iris_radius=26.0)
norm = rubber_sheet(level, circles, out_size=(64, 512))
subrects, ratios = split_subimages(norm)
print(f"normalized iris rect {norm.rect.shape}, mask mean {norm.mask.mean():.3f}")
print("subimage mask ratios:", [round(r, 3) for r in ratios])
