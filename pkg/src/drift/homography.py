"""Projective transforms and robust estimation.

Homographies model global handshake motion between burst frames and the
short-exposure alignment. Estimation is RANSAC over 4-point DLT
hypotheses with a least-squares (full DLT) refinement on the inlier set.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class EstimationFailedError(RuntimeError):
    """Raised when no acceptable homography can be estimated."""


@dataclass(frozen=True)
class Homography:
    """3x3 projective transform, normalized so m[2,2] == 1."""

    m: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.m, dtype=np.float64).reshape(3, 3)
        if abs(m[2, 2]) < 1e-12:
            raise ValueError("homography has vanishing scale element")
        m = m / m[2, 2]
        if abs(np.linalg.det(m)) <= 1e-12:
            raise ValueError("homography is not invertible")
        m = np.ascontiguousarray(m)
        m.setflags(write=False)
        object.__setattr__(self, "m", m)

    @classmethod
    def identity(cls) -> "Homography":
        return cls(np.eye(3))

    @classmethod
    def translation(cls, tx: float, ty: float) -> "Homography":
        m = np.eye(3)
        m[0, 2] = tx
        m[1, 2] = ty
        return cls(m)

    def inverse(self) -> "Homography":
        return Homography(np.linalg.inv(self.m))

    def compose(self, other: "Homography") -> "Homography":
        """self after other: (self @ other)(p) = self(other(p))."""
        return Homography(self.m @ other.m)

    def apply(self, pts: np.ndarray) -> np.ndarray:
        """Map (N, 2) points through the transform."""
        pts = np.asarray(pts, dtype=np.float64)
        ones = np.ones((pts.shape[0], 1))
        hom = np.hstack([pts, ones]) @ self.m.T
        return hom[:, :2] / hom[:, 2:3]

    def is_identity(self, tol: float = 0.0) -> bool:
        return np.max(np.abs(self.m - np.eye(3))) <= tol


def _normalize_points(pts: np.ndarray):
    """Hartley normalization: centroid to origin, mean distance sqrt(2)."""
    centroid = pts.mean(axis=0)
    d = np.sqrt(((pts - centroid) ** 2).sum(axis=1)).mean()
    scale = np.sqrt(2.0) / max(d, 1e-12)
    t = np.array(
        [[scale, 0, -scale * centroid[0]],
         [0, scale, -scale * centroid[1]],
         [0, 0, 1]]
    )
    ones = np.ones((pts.shape[0], 1))
    normed = np.hstack([pts, ones]) @ t.T
    return normed[:, :2], t


def _dlt(src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    """Direct linear transform on >= 4 correspondences (normalized)."""
    sn, ts = _normalize_points(src)
    dn, td = _normalize_points(dst)
    n = src.shape[0]
    a = np.zeros((2 * n, 9))
    x, y = sn[:, 0], sn[:, 1]
    u, v = dn[:, 0], dn[:, 1]
    a[0::2, 0] = -x
    a[0::2, 1] = -y
    a[0::2, 2] = -1
    a[0::2, 6] = u * x
    a[0::2, 7] = u * y
    a[0::2, 8] = u
    a[1::2, 3] = -x
    a[1::2, 4] = -y
    a[1::2, 5] = -1
    a[1::2, 6] = v * x
    a[1::2, 7] = v * y
    a[1::2, 8] = v
    _, _, vt = np.linalg.svd(a)
    h = vt[-1].reshape(3, 3)
    return np.linalg.inv(td) @ h @ ts


def _has_collinear_triple(pts: np.ndarray, tol: float = 1e-8) -> bool:
    n = pts.shape[0]
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                v1 = pts[j] - pts[i]
                v2 = pts[k] - pts[i]
                if abs(v1[0] * v2[1] - v1[1] * v2[0]) < tol:
                    return True
    return False


def reprojection_errors(h: Homography, src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    proj = h.apply(src)
    return np.sqrt(((proj - dst) ** 2).sum(axis=1))


def estimate_homography(
    src_pts,
    dst_pts,
    iters: int = 500,
    inlier_px: float = 1.0,
    min_inliers: int = 4,
    seed: int = 0,
) -> Homography:
    """RANSAC + DLT homography from point correspondences.

    Raises EstimationFailedError for < 4 points, degenerate
    configurations, or an inlier set smaller than `min_inliers`.
    """
    src = np.asarray(src_pts, dtype=np.float64).reshape(-1, 2)
    dst = np.asarray(dst_pts, dtype=np.float64).reshape(-1, 2)
    if src.shape != dst.shape:
        raise EstimationFailedError("source/destination point count mismatch")
    n = src.shape[0]
    if n < 4:
        raise EstimationFailedError(f"need at least 4 correspondences, got {n}")

    rng = np.random.default_rng(seed)
    best_mask = None
    best_count = 0
    for _ in range(iters):
        idx = rng.choice(n, size=4, replace=False)
        s4, d4 = src[idx], dst[idx]
        if _has_collinear_triple(s4) or _has_collinear_triple(d4):
            continue
        try:
            cand = Homography(_dlt(s4, d4))
        except (ValueError, np.linalg.LinAlgError):
            continue
        errs = reprojection_errors(cand, src, dst)
        mask = errs <= inlier_px
        count = int(mask.sum())
        if count > best_count:
            best_count = count
            best_mask = mask
    if best_mask is None:
        raise EstimationFailedError("all minimal samples degenerate")
    if best_count < max(min_inliers, 4):
        raise EstimationFailedError(
            f"only {best_count} inliers, need {max(min_inliers, 4)}"
        )

    # least-squares refinement: full DLT on the inlier set, iterated until
    # the inlier mask stabilizes
    refined = Homography(_dlt(src[best_mask], dst[best_mask]))
    for _ in range(3):
        mask = reprojection_errors(refined, src, dst) <= inlier_px
        if int(mask.sum()) < 4 or np.array_equal(mask, best_mask):
            break
        best_mask = mask
        refined = Homography(_dlt(src[mask], dst[mask]))
    final_count = int((reprojection_errors(refined, src, dst) <= inlier_px).sum())
    if final_count < max(min_inliers, 4):
        raise EstimationFailedError(
            f"only {final_count} inliers after refinement, need {max(min_inliers, 4)}"
        )
    return refined
