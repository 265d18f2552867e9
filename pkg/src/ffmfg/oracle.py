"""Independent brute-force cross-checks.

Everything here is deliberately dumb: central finite differences, the 2x2
quadratic-formula eigensolver, and a log-linear level-set solve. These are
the oracles the closed forms in `analysis` are tested against, so they must
not share code paths with them.
"""

from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np

from .core import DomainError, FFMFGError


class SingularSystemError(FFMFGError):
    pass


@dataclass(frozen=True)
class FDConfig:
    """Central-difference stepping: step h, optionally scaled by |coordinate|."""

    h: float = 1e-5
    order: int = 2
    relative_scale: bool = True

    def __post_init__(self):
        if self.h <= 0.0:
            raise FFMFGError(f"step h must be > 0, got {self.h}")
        if self.order != 2:
            raise FFMFGError("only second-order central differences are provided")


def fd_derivatives(
    f: Callable[[float, float], float],
    point: Tuple[float, float],
    cfg: FDConfig = FDConfig(),
) -> Tuple[np.ndarray, np.ndarray]:
    """Gradient and Hessian of f(v, m) by second-order central differences.

    Steps are h * max(|coordinate|, 1) per coordinate when relative scaling is
    on. Raises DomainError if any stencil point leaves the region v>0, m>0.
    """
    v, m = float(point[0]), float(point[1])
    hv = cfg.h * max(abs(v), 1.0) if cfg.relative_scale else cfg.h
    hm = cfg.h * max(abs(m), 1.0) if cfg.relative_scale else cfg.h
    if v - hv <= 0.0 or m - hm <= 0.0:
        raise DomainError(
            f"stencil around ({v}, {m}) with steps ({hv}, {hm}) leaves v>0, m>0"
        )

    f00 = f(v, m)
    fpv = f(v + hv, m)
    fmv = f(v - hv, m)
    fpm = f(v, m + hm)
    fmm_ = f(v, m - hm)
    fpp = f(v + hv, m + hm)
    fpm_ = f(v + hv, m - hm)
    fmp = f(v - hv, m + hm)
    fmm2 = f(v - hv, m - hm)

    grad = np.array([(fpv - fmv) / (2.0 * hv), (fpm - fmm_) / (2.0 * hm)])
    hvv = (fpv - 2.0 * f00 + fmv) / hv**2
    hmm = (fpm - 2.0 * f00 + fmm_) / hm**2
    hvm = (fpp - fpm_ - fmp + fmm2) / (4.0 * hv * hm)
    hess = np.array([[hvv, hvm], [hvm, hmm]])
    return grad, 0.5 * (hess + hess.T)


@dataclass(frozen=True, eq=False)
class Eig2Result:
    """Eigenvalues (ascending when real) and unit right eigenvectors by column."""

    values: np.ndarray
    vectors: np.ndarray | None
    is_complex: bool


def _unit_eigvec(mat: np.ndarray, lam: float) -> np.ndarray:
    a, b = mat[0, 0], mat[0, 1]
    c, d = mat[1, 0], mat[1, 1]
    # (mat - lam I) r = 0; take the better-conditioned row.
    cand1 = np.array([-b, a - lam])
    cand2 = np.array([d - lam, -c])
    r = cand1 if np.linalg.norm(cand1) >= np.linalg.norm(cand2) else cand2
    n = np.linalg.norm(r)
    if n == 0.0:
        # lam is a double eigenvalue of a multiple of the identity
        return np.array([1.0, 0.0])
    r = r / n
    lead = r[0] if r[0] != 0.0 else r[1]
    return r if lead > 0 else -r


def eig2_numeric(mat: np.ndarray) -> Eig2Result:
    """Quadratic-formula eigensolver for a real 2x2 matrix.

    A negative discriminant returns the complex-conjugate pair with the
    is_complex flag set and no eigenvectors.
    """
    mat = np.asarray(mat, dtype=float)
    if mat.shape != (2, 2) or not np.all(np.isfinite(mat)):
        raise FFMFGError("expected a finite 2x2 matrix")
    tr = mat[0, 0] + mat[1, 1]
    det = mat[0, 0] * mat[1, 1] - mat[0, 1] * mat[1, 0]
    disc = tr * tr - 4.0 * det
    if disc < 0.0:
        root = np.sqrt(-disc) / 2.0
        values = np.array([tr / 2.0 - 1j * root, tr / 2.0 + 1j * root])
        return Eig2Result(values=values, vectors=None, is_complex=True)
    sq = np.sqrt(disc)
    lam1, lam2 = (tr - sq) / 2.0, (tr + sq) / 2.0
    vectors = np.column_stack([_unit_eigvec(mat, lam1), _unit_eigvec(mat, lam2)])
    return Eig2Result(values=np.array([lam1, lam2]), vectors=vectors, is_complex=False)


def spectral_radius_2x2(j11, j12, j21, j22):
    """Vectorized spectral-radius bound for 2x2 matrices given by entries.

    Real spectrum: exact max |eigenvalue|. Complex spectrum: the upper bound
    |trace|/2 + sqrt(|det|). Returns (bound, had_complex).
    """
    tr = j11 + j22
    det = j11 * j22 - j12 * j21
    disc = tr * tr - 4.0 * det
    real_part = (np.abs(tr) + np.sqrt(np.maximum(disc, 0.0))) / 2.0
    complex_part = np.abs(tr) / 2.0 + np.sqrt(np.abs(det))
    is_complex = disc < 0.0
    return np.where(is_complex, complex_part, real_part), bool(np.any(is_complex))


def level_set_solve(M: float, spec) -> Tuple[float, float]:
    """Intersection of the level sets {z = M} and {w = M}.

    In (ln v, ln m) both level sets are straight lines, so this is an exact
    2x2 linear solve followed by exponentiation.
    """
    if M <= 0.0:
        raise FFMFGError(f"level M must be > 0, got {M}")
    if spec.s == 0.0 or spec.r == 0.0:
        raise SingularSystemError("exponents s and r must be nonzero")
    A, B = spec.A, spec.B
    mat = np.array([[spec.s / A, spec.s / 2.0], [spec.r / B, spec.r / 2.0]])
    det = mat[0, 0] * mat[1, 1] - mat[0, 1] * mat[1, 0]
    scale = np.max(np.abs(mat))
    if abs(det) <= 1e-14 * scale * scale:
        raise SingularSystemError(f"level-set system is singular (det = {det})")
    rhs = np.array([np.log(M), np.log(M)])
    log_v, log_m = np.linalg.solve(mat, rhs)
    return float(np.exp(log_v)), float(np.exp(log_m))
