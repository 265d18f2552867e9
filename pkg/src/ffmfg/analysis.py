"""Closed-form algebra of the congestion conservation-law system.

The system in the variables (v, m) on the unit torus is

    v_t + (F1(v, m))_x = 0,      m_t + (F2(v, m))_x = 0,

with F2 = -v m^(1-alpha) and F1 depending on the density coupling:

    none:         F1 = v^2 / (2 m^alpha)
    monotone_ff:  F1 = v^2 / (2 m^alpha) - K m^alpha
    antimonotone: F1 = -v^2 / (2 m^alpha) - K m^alpha

This module holds everything that is known in closed form on the region
A = {v > 0, m > 0}: the flux and its Jacobian, characteristic speeds and
eigenvectors, genuine-nonlinearity products, the separable entropy family
eta = v^a m^b, the power-law invariants z and w with their convexity
regions, and the invariant-region lower bound on the density.
"""

from dataclasses import dataclass

import numpy as np

from .core import (
    Coupling,
    DomainError,
    FFMFGError,
    ModelParams,
    NonPositiveDensityError,
)


class InvalidExponentError(FFMFGError):
    """Leading entropy exponent outside a < 0 or a > 1."""


class SpecOutOfRegionError(FFMFGError):
    """Invariant exponents outside the convexity regions S0 / S1."""


class ConvexityViolationError(FFMFGError):
    """Sampled Hessian failed positive semidefiniteness; carries the witness."""

    def __init__(self, message: str, point, minor1: float, det: float):
        super().__init__(message)
        self.point = point
        self.minor1 = minor1
        self.det = det


def _disc(alpha):
    """The root sqrt(4 - 2*alpha + alpha^2), positive for every real alpha."""
    return np.sqrt(4.0 - 2.0 * alpha + alpha * alpha)


def _char_coeffs(alpha):
    """Coefficients A = 2 - alpha + disc and B = 2 - alpha - disc."""
    d = _disc(alpha)
    return 2.0 - alpha + d, 2.0 - alpha - d


def _require_density(m):
    if np.any(np.asarray(m) <= 0.0):
        raise NonPositiveDensityError("density m must be > 0")


def _require_region(v, m):
    if np.any(np.asarray(v) <= 0.0) or np.any(np.asarray(m) <= 0.0):
        raise DomainError("point must lie in the region v > 0, m > 0")


# ---------------------------------------------------------------------------
# flux and characteristic structure
# ---------------------------------------------------------------------------

def flux_phys(v, m, params: ModelParams):
    """Physical flux (F1, F2). Accepts scalars or equal-shape arrays."""
    _require_density(m)
    v = np.asarray(v, dtype=float)
    m = np.asarray(m, dtype=float)
    ma = m**params.alpha
    f2 = -v * m / ma
    if params.coupling is Coupling.NONE:
        f1 = v * v / (2.0 * ma)
    elif params.coupling is Coupling.MONOTONE_FF:
        f1 = v * v / (2.0 * ma) - params.K * ma
    else:
        f1 = -v * v / (2.0 * ma) - params.K * ma
    return np.stack([f1, f2])


def flux_jacobian_entries(v, m, params: ModelParams):
    """Entries (j11, j12, j21, j22) of dF/d(v, m), vectorized."""
    _require_density(m)
    v = np.asarray(v, dtype=float)
    m = np.asarray(m, dtype=float)
    alpha, K = params.alpha, params.K
    ma = m**alpha
    j21 = -m / ma
    j22 = -(1.0 - alpha) * v / ma
    if params.coupling is Coupling.ANTIMONOTONE:
        j11 = -v / ma
        j12 = 0.5 * alpha * v * v / (ma * m) - K * alpha * ma / m
    else:
        j11 = v / ma
        j12 = -0.5 * alpha * v * v / (ma * m)
        if params.coupling is Coupling.MONOTONE_FF:
            j12 = j12 - K * alpha * ma / m
    return j11, j12, j21, j22


def flux_jacobian(v, m, params: ModelParams) -> np.ndarray:
    """Jacobian dF/d(v, m) as a 2x2 array (leading axes when vectorized)."""
    j11, j12, j21, j22 = flux_jacobian_entries(v, m, params)
    return np.array([[j11, j12], [j21, j22]])


@dataclass(frozen=True, eq=False)
class EigenPair:
    """Characteristic speeds lambda1 <= lambda2 with right eigenvectors r1, r2."""

    lambda1: float
    lambda2: float
    r1: np.ndarray
    r2: np.ndarray


def eigenstructure(v: float, m: float, alpha: float) -> EigenPair:
    """Closed-form eigenstructure of the uncoupled flux Jacobian.

    lambda_{1,2} = (alpha -/+ disc) * v / (2 m^alpha) with right eigenvectors
    ((2 - alpha -/+ disc) v, -2m). Speeds coincide exactly at v = 0, where
    strict hyperbolicity degenerates.
    """
    _require_density(m)
    d = _disc(alpha)
    lam1 = (alpha - d) * v / (2.0 * m**alpha)
    lam2 = (alpha + d) * v / (2.0 * m**alpha)
    r1 = np.array([(2.0 - alpha - d) * v, -2.0 * m])
    r2 = np.array([(2.0 - alpha + d) * v, -2.0 * m])
    if lam1 > lam2:  # v < 0 flips the ordering; swap labels, keep the pairing
        lam1, lam2, r1, r2 = lam2, lam1, r2, r1
    return EigenPair(float(lam1), float(lam2), r1, r2)


def genuine_nonlinearity(v, m, alpha):
    """Products grad(lambda_i) . r_i for the two characteristic families.

    g1 = (2 + alpha^2 - disc - alpha*disc) v m^-alpha,
    g2 = (2 + alpha^2 + disc + alpha*disc) v m^-alpha.
    For 0 < alpha < 2 these satisfy g1 <= 0 <= g2 with equality iff v = 0.
    """
    _require_density(m)
    v = np.asarray(v, dtype=float)
    m = np.asarray(m, dtype=float)
    d = _disc(alpha)
    base = v / m**alpha
    g1 = (2.0 + alpha * alpha - d - alpha * d) * base
    g2 = (2.0 + alpha * alpha + d + alpha * d) * base
    return g1, g2


# ---------------------------------------------------------------------------
# separable entropies eta = v^a m^b
# ---------------------------------------------------------------------------

def theta_alpha(alpha):
    """Limiting exponent ratio -b(alpha, a)/a as a -> infinity.

    theta(alpha) = (sqrt(alpha^2 - 2*alpha + 4) + alpha - 2) / 2, increasing
    from theta(0) = 0 to theta(2) = 1.
    """
    return 0.5 * (_disc(alpha) + np.asarray(alpha, dtype=float) - 2.0)


def entropy_condition_residual(alpha: float, a: float, b: float) -> float:
    """Algebraic condition on (a, b): alpha*a*(-a+2b+1) + 2b*(-2a+b-1).

    eta = v^a m^b is an entropy of the uncoupled system iff this vanishes.
    """
    return alpha * a * (-a + 2.0 * b + 1.0) + 2.0 * b * (-2.0 * a + b - 1.0)


def entropy_exponent_b(alpha: float, a: float) -> float:
    """The exponent b(alpha, a) making v^a m^b a convex entropy.

    b = (1 + 2a - a*alpha - sqrt(1 + 4a - 4a*alpha + a^2 (4 - 2*alpha + alpha^2))) / 2.
    Requires a < 0 or a > 1; for a > 1 the result is negative and -b/a
    increases to theta(alpha) as a grows.
    """
    if 0.0 <= a <= 1.0:
        raise InvalidExponentError(
            f"leading exponent must satisfy a < 0 or a > 1, got a = {a}"
        )
    rad = 1.0 + 4.0 * a - 4.0 * a * alpha + a * a * (4.0 - 2.0 * alpha + alpha * alpha)
    return 0.5 * (1.0 + 2.0 * a - a * alpha - np.sqrt(rad))


@dataclass(frozen=True)
class EntropyPair:
    """Exponents of a separable entropy v^a m^b."""

    a: float
    b: float

    @classmethod
    def for_alpha(cls, alpha: float, a: float) -> "EntropyPair":
        """Entropy pair (a, b(alpha, a)); verifies the defining condition."""
        b = entropy_exponent_b(alpha, a)
        residual = entropy_condition_residual(alpha, a, b)
        scale = max(abs(alpha) * a * a, abs(b) * abs(b), 1.0)
        if abs(residual) > 1e-12 * scale:
            raise FFMFGError(
                f"entropy condition residual {residual} exceeds tolerance at "
                f"(alpha={alpha}, a={a}, b={b})"
            )
        return cls(a=a, b=b)

    def is_convex(self) -> bool:
        """Sufficient convexity conditions a(a-1) >= 0 and ab(a+b-1) <= 0."""
        a, b = self.a, self.b
        return a * (a - 1.0) >= 0.0 and a * b * (a + b - 1.0) <= 0.0


def entropy_pde_terms(a: float, b: float, v, m, alpha: float):
    """The three terms of the entropy equation at eta = v^a m^b.

    (alpha v^2 / (2 m^(alpha+1))) eta_vv,  -m^(1-alpha) eta_mm,
    ((2-alpha) v / m^alpha) eta_vm, using the closed-form partials.
    """
    _require_region(v, m)
    v = np.asarray(v, dtype=float)
    m = np.asarray(m, dtype=float)
    eta_vv = a * (a - 1.0) * v ** (a - 2.0) * m**b
    eta_mm = b * (b - 1.0) * v**a * m ** (b - 2.0)
    eta_vm = a * b * v ** (a - 1.0) * m ** (b - 1.0)
    t1 = alpha * v * v / (2.0 * m ** (alpha + 1.0)) * eta_vv
    t2 = -(m ** (1.0 - alpha)) * eta_mm
    t3 = (2.0 - alpha) * v / m**alpha * eta_vm
    return t1, t2, t3


def entropy_residual_pde(a: float, b: float, v, m, alpha: float):
    """Residual of the entropy equation for eta = v^a m^b (0 iff entropy)."""
    t1, t2, t3 = entropy_pde_terms(a, b, v, m, alpha)
    return t1 + t2 + t3


def _power_value_grad_hess(p: float, q: float, v: float, m: float):
    """Value, gradient and Hessian of f = v^p m^q at a point of the region."""
    value = v**p * m**q
    grad = np.array([p * value / v, q * value / m])
    hess = np.array(
        [
            [p * (p - 1.0) * value / (v * v), p * q * value / (v * m)],
            [p * q * value / (v * m), q * (q - 1.0) * value / (m * m)],
        ]
    )
    return value, grad, hess


def entropy_eval(a: float, b: float, v: float, m: float):
    """Value, gradient, Hessian of eta = v^a m^b at a single point."""
    _require_region(v, m)
    return _power_value_grad_hess(a, b, float(v), float(m))


def entropy_hessian_entries(a: float, b: float, v, m):
    """Hessian entries (h_vv, h_vm, h_mm) of v^a m^b, vectorized."""
    _require_region(v, m)
    v = np.asarray(v, dtype=float)
    m = np.asarray(m, dtype=float)
    value = v**a * m**b
    return (
        a * (a - 1.0) * value / (v * v),
        a * b * value / (v * m),
        b * (b - 1.0) * value / (m * m),
    )


# ---------------------------------------------------------------------------
# power-law invariants z = v^(s/A) m^(s/2) and w = v^(r/B) m^(r/2)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RiemannSpec:
    """Exponents (s, r) of the invariants z and w at a fixed alpha.

    A = 2 - alpha + disc > 0 and B = 2 - alpha - disc < 0 for alpha in (0, 2).
    z is convex iff s is in S0 = {s < 0}; w is convex iff r is in
    S1 = {r < 2B/(B+2)}.
    """

    alpha: float
    s: float
    r: float

    def __post_init__(self):
        if not 0.0 < self.alpha < 2.0:
            raise FFMFGError(f"alpha must lie in (0, 2), got {self.alpha}")
        if not (np.isfinite(self.s) and np.isfinite(self.r)):
            raise FFMFGError("exponents s, r must be finite")

    @property
    def A(self) -> float:
        return float(_char_coeffs(self.alpha)[0])

    @property
    def B(self) -> float:
        return float(_char_coeffs(self.alpha)[1])

    @property
    def s1_threshold(self) -> float:
        """Upper boundary 2B/(B+2) of the convexity region for w (negative)."""
        B = self.B
        return 2.0 * B / (B + 2.0)

    @property
    def s_in_s0(self) -> bool:
        return self.s < 0.0

    @property
    def r_in_s1(self) -> bool:
        return self.r < self.s1_threshold


def riemann_z(spec: RiemannSpec, v: float, m: float):
    """Value, gradient, Hessian of z = v^(s/A) m^(s/2).

    The gradient annihilates the fast-family eigenvector (A v, -2m).
    """
    _require_region(v, m)
    return _power_value_grad_hess(spec.s / spec.A, spec.s / 2.0, float(v), float(m))


def riemann_w(spec: RiemannSpec, v: float, m: float):
    """Value, gradient, Hessian of w = v^(r/B) m^(r/2).

    The gradient annihilates the slow-family eigenvector (B v, -2m).
    """
    _require_region(v, m)
    return _power_value_grad_hess(spec.r / spec.B, spec.r / 2.0, float(v), float(m))


def riemann_values(spec: RiemannSpec, v, m):
    """Vectorized values (z, w) on arrays of states in the region."""
    _require_region(v, m)
    v = np.asarray(v, dtype=float)
    m = np.asarray(m, dtype=float)
    z = v ** (spec.s / spec.A) * m ** (spec.s / 2.0)
    w = v ** (spec.r / spec.B) * m ** (spec.r / 2.0)
    return z, w


@dataclass(frozen=True)
class ConvexityReport:
    """Minimum observed leading principal minors over the sampled points."""

    kind: str
    exponent: float
    alpha: float
    samples: int
    min_minor1: float
    min_det: float


def convexity_check(
    kind: str,
    exponent: float,
    alpha: float,
    sample_count: int = 1000,
    seed: int = 0,
) -> ConvexityReport:
    """Sample the Hessian on (v, m) in [1e-2, 1e2]^2 and test PSD-ness.

    kind selects the function: 'entropy' (exponent is a, b derived),
    'z' (exponent is s) or 'w' (exponent is r). Both leading principal
    minors must stay >= -1e-12 * scale at every sampled point; the first
    failure raises ConvexityViolationError with the witness point.
    """
    if kind == "entropy":
        p = exponent
        q = entropy_exponent_b(alpha, exponent)
    elif kind == "z":
        A, _ = _char_coeffs(alpha)
        p, q = exponent / A, exponent / 2.0
    elif kind == "w":
        _, B = _char_coeffs(alpha)
        if B == 0.0:
            raise FFMFGError("w is undefined at alpha = 0")
        p, q = exponent / B, exponent / 2.0
    else:
        raise FFMFGError(f"kind must be one of 'entropy', 'z', 'w'; got {kind!r}")

    rng = np.random.default_rng(seed)
    v = 10.0 ** rng.uniform(-2.0, 2.0, sample_count)
    m = 10.0 ** rng.uniform(-2.0, 2.0, sample_count)
    value = v**p * m**q
    hvv = p * (p - 1.0) * value / (v * v)
    hvm = p * q * value / (v * m)
    hmm = q * (q - 1.0) * value / (m * m)
    scale = np.maximum(np.maximum(np.abs(hvv), np.abs(hmm)), np.abs(hvm))
    det = hvv * hmm - hvm * hvm
    bad = (hvv < -1e-12 * scale) | (det < -1e-12 * scale * scale)
    if np.any(bad):
        i = int(np.argmax(bad))
        raise ConvexityViolationError(
            f"Hessian of {kind} (exponent {exponent}, alpha {alpha}) is not PSD "
            f"at (v, m) = ({v[i]}, {m[i]}): minor1 = {hvv[i]}, det = {det[i]}",
            point=(float(v[i]), float(m[i])),
            minor1=float(hvv[i]),
            det=float(det[i]),
        )
    return ConvexityReport(
        kind=kind,
        exponent=float(exponent),
        alpha=float(alpha),
        samples=int(sample_count),
        min_minor1=float(np.min(hvv)),
        min_det=float(np.min(det)),
    )


def density_lower_bound(M: float, spec: RiemannSpec) -> float:
    """Density at the intersection of the sublevel boundaries {z = M}, {w = M}.

    m_min = M ** (2 (A r - B s) / ((A - B) r s)). States with z < M and w < M
    have m above this value, which is what makes {z < M, w < M} an invariant
    region with a positive density floor.
    """
    if M <= 0.0:
        raise FFMFGError(f"level M must be > 0, got {M}")
    if not spec.s_in_s0:
        raise SpecOutOfRegionError(f"s = {spec.s} is not in S0 (requires s < 0)")
    if not spec.r_in_s1:
        raise SpecOutOfRegionError(
            f"r = {spec.r} is not in S1 (requires r < {spec.s1_threshold})"
        )
    A, B, s, r = spec.A, spec.B, spec.s, spec.r
    exponent = 2.0 * (A * r - B * s) / ((A - B) * r * s)
    return float(M**exponent)
