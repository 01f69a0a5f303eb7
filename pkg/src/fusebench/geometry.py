"""Trait-extraction geometry.

Rotation normalization from eye keypoints, rectangular crops, and
rubber-sheet iris normalization with occlusion masks. Image coordinates
are pixel units, x right, y down; intensities are floats in [0, 1].

All resampling is bilinear; out-of-bounds reads return 0 and clear the
corresponding mask bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GeometryError, IngestError

# rotations below this are treated as exact identity (no resampling), so
# already-horizontal fixtures survive a normalize round trip bitwise
IDENTITY_ANGLE_EPS = 1e-12


def _check_image(img: np.ndarray) -> np.ndarray:
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 2:
        raise IngestError(f"expected a 2-D gray image, got shape {img.shape}")
    if not np.all(np.isfinite(img)):
        raise IngestError("image has non-finite intensities")
    return img


@dataclass(frozen=True)
class FaceKeypoints:
    """The four keypoints the pipeline consumes, as (x, y) pixel pairs."""

    left_eye: tuple[float, float]
    right_eye: tuple[float, float]
    nose_center: tuple[float, float]
    left_eyebrow_center: tuple[float, float]

    def as_array(self) -> np.ndarray:
        return np.array([self.left_eye, self.right_eye,
                         self.nose_center, self.left_eyebrow_center])

    @classmethod
    def from_array(cls, arr) -> "FaceKeypoints":
        arr = np.asarray(arr, dtype=np.float64)
        return cls(tuple(arr[0]), tuple(arr[1]), tuple(arr[2]), tuple(arr[3]))


@dataclass(frozen=True)
class CropSpec:
    center: tuple[float, float]
    width: int
    height: int

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise GeometryError(f"crop size {self.width}x{self.height} must be >= 1")


@dataclass(frozen=True)
class IrisCircles:
    pupil_center: tuple[float, float]
    pupil_radius: float
    iris_center: tuple[float, float]
    iris_radius: float
    occlusion_mask: np.ndarray | None = None  # 1 = valid iris pixel

    def __post_init__(self):
        if not (0.0 < self.pupil_radius < self.iris_radius):
            raise GeometryError(
                f"need 0 < pupil_radius < iris_radius, got "
                f"{self.pupil_radius} and {self.iris_radius}")
        pts = np.array([self.pupil_center, self.iris_center])
        if not np.all(np.isfinite(pts)):
            raise GeometryError("iris circle centers must be finite")


@dataclass(frozen=True)
class NormalizedIris:
    rect: np.ndarray  # H_n x W_n, radial x angular
    mask: np.ndarray  # same shape, values in {0, 1}


def rotation_angle(left_eye, right_eye) -> float:
    """Angle of the eye-to-eye segment: atan2(dy, dx) in radians."""
    dx = right_eye[0] - left_eye[0]
    dy = right_eye[1] - left_eye[1]
    if dx == 0.0 and dy == 0.0:
        raise GeometryError("eye keypoints coincide; rotation angle undefined")
    return math.atan2(dy, dx)


def bilinear_sample(img: np.ndarray, xs: np.ndarray, ys: np.ndarray):
    """Sample img at float coordinates. Returns (values, in_bounds_mask);
    out-of-bounds contributions are 0."""
    h, w = img.shape
    x0 = np.floor(xs).astype(int)
    y0 = np.floor(ys).astype(int)
    fx = xs - x0
    fy = ys - y0

    def at(yy, xx):
        ok = (xx >= 0) & (xx < w) & (yy >= 0) & (yy < h)
        vals = np.zeros(xx.shape)
        vals[ok] = img[yy[ok], xx[ok]]
        return vals

    v00 = at(y0, x0)
    v01 = at(y0, x0 + 1)
    v10 = at(y0 + 1, x0)
    v11 = at(y0 + 1, x0 + 1)
    vals = ((1 - fy) * ((1 - fx) * v00 + fx * v01)
            + fy * ((1 - fx) * v10 + fx * v11))
    in_bounds = (xs >= 0) & (xs <= w - 1) & (ys >= 0) & (ys <= h - 1)
    return vals, in_bounds


def normalize_rotation(image, keypoints: FaceKeypoints):
    """Rotate image and keypoints so the eye segment becomes horizontal.

    The rotation is by -rotation_angle about the eye midpoint. Keypoints
    get the exact rigid motion; pixels are resampled bilinearly with
    out-of-bounds reads filled with 0. A near-zero angle short-circuits to
    the identity so no interpolation noise is introduced.
    """
    image = _check_image(image)
    angle = rotation_angle(keypoints.left_eye, keypoints.right_eye)
    if abs(angle) < IDENTITY_ANGLE_EPS:
        return image, keypoints

    cx = (keypoints.left_eye[0] + keypoints.right_eye[0]) / 2.0
    cy = (keypoints.left_eye[1] + keypoints.right_eye[1]) / 2.0
    c, s = math.cos(-angle), math.sin(-angle)

    pts = keypoints.as_array() - (cx, cy)
    rotated = pts @ np.array([[c, s], [-s, c]]) + (cx, cy)
    new_kp = FaceKeypoints.from_array(rotated)

    h, w = image.shape
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    # inverse map: output pixel p samples input at c + R(angle) (p - c)
    dx, dy = xx - cx, yy - cy
    ci, si = math.cos(angle), math.sin(angle)
    sx = cx + ci * dx - si * dy
    sy = cy + si * dx + ci * dy
    vals, _ = bilinear_sample(image, sx, sy)
    return vals, new_kp


def crop(image, spec: CropSpec):
    """Window of spec.width x spec.height centered on spec.center.

    Integer top-left = round(center) - floor(size/2); out-of-bounds pixels
    are 0. Returns (window, clipped_fraction). A window fully outside the
    image is an error.
    """
    image = _check_image(image)
    h, w = image.shape
    cx = int(math.floor(spec.center[0] + 0.5))
    cy = int(math.floor(spec.center[1] + 0.5))
    x0 = cx - spec.width // 2
    y0 = cy - spec.height // 2
    out = np.zeros((spec.height, spec.width))
    xs0, xs1 = max(x0, 0), min(x0 + spec.width, w)
    ys0, ys1 = max(y0, 0), min(y0 + spec.height, h)
    if xs0 >= xs1 or ys0 >= ys1:
        raise GeometryError(f"crop at ({cx}, {cy}) size {spec.width}x{spec.height} "
                            "lies fully outside the image")
    out[ys0 - y0:ys1 - y0, xs0 - x0:xs1 - x0] = image[ys0:ys1, xs0:xs1]
    inside = (xs1 - xs0) * (ys1 - ys0)
    clipped_fraction = 1.0 - inside / (spec.width * spec.height)
    return out, clipped_fraction


def rubber_sheet(image, circles: IrisCircles, out_size=(64, 512),
                 angle_offset: float = 0.0) -> NormalizedIris:
    """Unwrap the pupil-to-iris annulus into a fixed-size rectangle.

    Output cell (r, c): theta = 2*pi*c/W_n + angle_offset, rho = r/(H_n-1);
    the sample point blends the pupil-circle and iris-circle boundary
    points at that angle linearly in rho. Mask is 1 iff the point is in
    bounds and the occlusion mask (nearest pixel), when given, is 1.
    """
    image = _check_image(image)
    hn, wn = out_size
    if hn < 2 or wn < 8:
        raise GeometryError(f"normalized size {hn}x{wn} too small (need >= 2x8)")
    theta = 2.0 * np.pi * np.arange(wn) / wn + angle_offset
    rho = (np.arange(hn) / (hn - 1))[:, None]
    px = circles.pupil_center[0] + circles.pupil_radius * np.cos(theta)[None, :]
    py = circles.pupil_center[1] + circles.pupil_radius * np.sin(theta)[None, :]
    ix = circles.iris_center[0] + circles.iris_radius * np.cos(theta)[None, :]
    iy = circles.iris_center[1] + circles.iris_radius * np.sin(theta)[None, :]
    sx = (1.0 - rho) * px + rho * ix
    sy = (1.0 - rho) * py + rho * iy
    vals, in_bounds = bilinear_sample(image, sx, sy)
    mask = in_bounds.astype(np.float64)
    if circles.occlusion_mask is not None:
        occ = _check_image(circles.occlusion_mask)
        xi = np.clip(np.floor(sx + 0.5).astype(int), 0, occ.shape[1] - 1)
        yi = np.clip(np.floor(sy + 0.5).astype(int), 0, occ.shape[0] - 1)
        mask *= (occ[yi, xi] == 1.0)
    return NormalizedIris(rect=vals, mask=mask)


def split_subimages(norm: NormalizedIris):
    """Four equal angular strips with their mask ratios.

    Returns (subrects, mask_ratios); mask_ratio_i is the mean of strip i's
    mask. The angular width must be divisible by 4.
    """
    hn, wn = norm.rect.shape
    if wn % 4 != 0:
        raise GeometryError(f"angular width {wn} not divisible by 4")
    step = wn // 4
    subrects, ratios = [], []
    for i in range(4):
        cols = slice(i * step, (i + 1) * step)
        subrects.append(norm.rect[:, cols])
        ratios.append(float(norm.mask[:, cols].mean()))
    return subrects, tuple(ratios)


# crop sizes are scaled by inter-eye distance; the source method never
# states pixel sizes, so these defaults are engine choices
DEFAULT_CROP_SCALES = {
    "periocular": (0.9, 0.9),
    "nose": (0.7, 0.7),
    "eyebrow": (0.9, 0.45),
}


def trait_crop_spec(trait_name: str, keypoints: FaceKeypoints,
                    scales=None) -> CropSpec:
    """Crop spec for periocular/nose/eyebrow, scaled by inter-eye distance."""
    scales = dict(DEFAULT_CROP_SCALES, **(scales or {}))
    if trait_name not in scales:
        raise GeometryError(f"no crop rule for trait {trait_name!r}")
    le, re = np.array(keypoints.left_eye), np.array(keypoints.right_eye)
    dist = float(np.linalg.norm(re - le))
    if dist == 0.0:
        raise GeometryError("inter-eye distance is zero")
    centers = {
        "periocular": keypoints.left_eye,
        "nose": keypoints.nose_center,
        "eyebrow": keypoints.left_eyebrow_center,
    }
    wscale, hscale = scales[trait_name]
    return CropSpec(center=centers[trait_name],
                    width=max(1, int(round(wscale * dist))),
                    height=max(1, int(round(hscale * dist))))


def read_pgm(path) -> np.ndarray:
    """Binary 8-bit PGM (P5) -> float image in [0, 1]."""
    with open(path, "rb") as fh:
        data = fh.read()
    tokens = []
    i = 0
    while len(tokens) < 4 and i < len(data):
        if data[i:i + 1].isspace():
            i += 1
        elif data[i:i + 1] == b"#":
            while i < len(data) and data[i:i + 1] != b"\n":
                i += 1
        else:
            j = i
            while j < len(data) and not data[j:j + 1].isspace():
                j += 1
            tokens.append(data[i:j])
            i = j
    if len(tokens) != 4 or tokens[0] != b"P5":
        raise IngestError(f"{path}: not a binary P5 PGM")
    w, h, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    if maxval != 255:
        raise IngestError(f"{path}: only 8-bit PGM supported (maxval {maxval})")
    i += 1  # single whitespace after maxval
    pixels = np.frombuffer(data[i:i + w * h], dtype=np.uint8)
    if pixels.size != w * h:
        raise IngestError(f"{path}: truncated pixel data")
    return pixels.reshape(h, w).astype(np.float64) / 255.0


def write_pgm(path, image) -> None:
    """Float image in [0, 1] -> binary 8-bit PGM (P5)."""
    image = _check_image(image)
    quant = np.clip(np.rint(image * 255.0), 0, 255).astype(np.uint8)
    h, w = quant.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode())
        fh.write(quant.tobytes())
