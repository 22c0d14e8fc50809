"""Quadratic hypersurfaces ``Q(x) + 2<v, x> = rho`` and the conics cut out on 2-planes."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

CLASSIFY_TOL = 1e-9
ORTHO_TOL = 1e-10


def _as_vector(x, name: str = "x") -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be a 1-D vector, got shape {arr.shape}")
    return arr


@dataclass(frozen=True, eq=False)
class QuadricSurface:
    """The level set ``{x : x^T B x + 2 <v, x> - rho = 0}``.

    ``B`` is symmetrized on construction, so only its symmetric part matters.
    """

    B: np.ndarray
    v: np.ndarray
    rho: float = 0.0

    def __post_init__(self):
        B = np.asarray(self.B, dtype=float)
        if B.ndim != 2 or B.shape[0] != B.shape[1]:
            raise ValueError(f"B must be square, got shape {B.shape}")
        d = B.shape[0]
        if d < 2:
            raise ValueError("dimension must be at least 2")
        v = np.zeros(d) if self.v is None else _as_vector(self.v, "v")
        if v.shape[0] != d:
            raise ValueError(f"v has length {v.shape[0]}, expected {d}")
        B = 0.5 * (B + B.T)
        if not np.any(B) and not np.any(v):
            raise ValueError("B and v are both zero: not a hypersurface")
        B.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "rho", float(self.rho))

    @property
    def d(self) -> int:
        return self.B.shape[0]

    @property
    def norm_B(self) -> float:
        """Largest absolute entry of ``B``."""
        return float(np.abs(self.B).max())

    def Q(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.einsum("...i,ij,...j->...", x, self.B, x)

    def bilinear(self, x, y) -> np.ndarray:
        return np.einsum("...i,ij,...j->...", np.asarray(x, float), self.B, np.asarray(y, float))

    def pullback(self, M, c=None) -> "QuadricSurface":
        """Surface ``{y : P(M y + c) = 0}``, i.e. ``M^{-1}(S - c)`` for invertible ``M``."""
        M = np.asarray(M, dtype=float)
        c = np.zeros(self.d) if c is None else _as_vector(c, "c")
        B = M.T @ self.B @ M
        v = M.T @ (self.B @ c + self.v)
        rho = self.rho - float(c @ self.B @ c) - 2.0 * float(self.v @ c)
        return QuadricSurface(B, v, rho)

    def to_dict(self) -> dict:
        return {"B": self.B.tolist(), "v": self.v.tolist(), "rho": self.rho}

    @classmethod
    def from_dict(cls, data: dict) -> "QuadricSurface":
        B = np.asarray(data["B"], dtype=float)
        return cls(B, data.get("v", np.zeros(B.shape[0])), data.get("rho", 0.0))

    @classmethod
    def sphere(cls, d: int, radius: float = 1.0) -> "QuadricSurface":
        return cls(np.eye(d), np.zeros(d), radius**2)

    @classmethod
    def diagonal(cls, p: int, q: int, rho: float = 0.0) -> "QuadricSurface":
        """``x_1^2 + ... + x_p^2 - x_{p+1}^2 - ... - x_{p+q}^2 = rho``."""
        return cls(np.diag([1.0] * p + [-1.0] * q), np.zeros(p + q), rho)


@dataclass(frozen=True, eq=False)
class Hyperplane:
    """``H_{u,s} = {xi : <xi, u> = s}`` with ``u`` normalized to unit length."""

    u: np.ndarray
    s: float = 0.0

    def __post_init__(self):
        u = _as_vector(self.u, "u")
        n = np.linalg.norm(u)
        if n == 0 or not np.isfinite(n):
            raise ValueError("hyperplane normal must be nonzero and finite")
        u = u / n
        u.setflags(write=False)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "s", float(self.s))

    @property
    def d(self) -> int:
        return self.u.shape[0]

    def basis(self) -> np.ndarray:
        """Orthonormal basis of the direction space ``u^perp`` as a ``d x (d-1)`` matrix."""
        return orthonormal_complement(self.u)

    def contains(self, xi, tol: float = 1e-12) -> bool:
        xi = np.asarray(xi, dtype=float)
        return abs(float(xi @ self.u) - self.s) <= tol * max(1.0, np.linalg.norm(xi))

    def to_dict(self) -> dict:
        return {"u": self.u.tolist(), "s": self.s}

    @classmethod
    def from_dict(cls, data: dict) -> "Hyperplane":
        return cls(data["u"], data.get("s", 0.0))


def orthonormal_complement(u) -> np.ndarray:
    """Columns form an orthonormal basis of ``u^perp``."""
    u = np.asarray(u, dtype=float)
    u = u / np.linalg.norm(u)
    d = u.shape[0]
    # Householder reflection sending e1 to u; its other columns span u^perp.
    e = np.zeros(d)
    e[0] = 1.0
    w = e - u if u[0] <= 0 else e + u
    H = np.eye(d) - 2.0 * np.outer(w, w) / (w @ w)
    return H[:, 1:]


def frame_with_first(u) -> np.ndarray:
    """Orthogonal matrix whose first column is the unit vector along ``u``."""
    u = np.asarray(u, dtype=float)
    u = u / np.linalg.norm(u)
    return np.column_stack([u, orthonormal_complement(u)])


def eval_p(S: QuadricSurface, x) -> float | np.ndarray:
    """``P(x) = x^T B x + 2 <v, x> - rho``; accepts a single point or an ``(n, d)`` batch."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != S.d:
        raise ValueError(f"point has dimension {x.shape[-1]}, surface has {S.d}")
    val = S.Q(x) + 2.0 * (x @ S.v) - S.rho
    return float(val) if np.ndim(val) == 0 else val


def scale(S: QuadricSurface, x) -> float | np.ndarray:
    """Magnitude ``|B|_inf |x|^2 + |v| |x| + |rho|`` used to make residuals relative."""
    x = np.asarray(x, dtype=float)
    r = np.linalg.norm(x, axis=-1)
    return S.norm_B * r**2 + np.linalg.norm(S.v) * r + abs(S.rho)


def on_surface(S: QuadricSurface, x, tol: float = 1e-9) -> bool | np.ndarray:
    if tol <= 0:
        raise ValueError("tol must be positive")
    res = np.abs(eval_p(S, x)) <= tol * np.maximum(1.0, scale(S, x))
    return bool(res) if np.ndim(res) == 0 else res


class ConicClass(str, enum.Enum):
    ELLIPSE = "Ellipse"
    POINT = "Point"
    EMPTY = "Empty"
    PARABOLA = "Parabola"
    PARALLEL_LINES = "ParallelLines"
    SINGLE_LINE = "SingleLine"
    HYPERBOLA = "Hyperbola"
    INTERSECTING_LINES = "IntersectingLines"
    LINE = "Line"
    # every coefficient vanishes: the whole 2-plane lies in the surface
    PLANE = "Plane"


@dataclass(frozen=True)
class ConicFiber:
    """Fiber equation ``a s^2 + 2 b s t + c t^2 + 2 p s + 2 q t = 0`` in coordinates (s, t)."""

    a: float
    b: float
    c: float
    p: float
    q: float

    def __call__(self, s, t):
        return self.a * s * s + 2 * self.b * s * t + self.c * t * t + 2 * self.p * s + 2 * self.q * t

    @property
    def discriminant(self) -> float:
        return self.a * self.c - self.b * self.b

    @property
    def quadratic_form(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.b, self.c]])

    @property
    def linear_part(self) -> np.ndarray:
        return np.array([self.p, self.q])

    def as_surface(self) -> QuadricSurface:
        """The fiber as a planar quadric through the origin of the (s, t) plane."""
        return QuadricSurface(self.quadratic_form, self.linear_part, 0.0)


def _check_orthonormal(u1, v2):
    if abs(np.linalg.norm(u1) - 1) > ORTHO_TOL or abs(np.linalg.norm(v2) - 1) > ORTHO_TOL:
        raise ValueError("u1 and v2 must be unit vectors")
    if abs(float(u1 @ v2)) > ORTHO_TOL:
        raise ValueError("u1 and v2 must be orthogonal")


def fiber_conic(S: QuadricSurface, x, u1, v2, tol: float = 1e-9) -> ConicFiber:
    x, u1, v2 = (_as_vector(a) for a in (x, u1, v2))
    if not on_surface(S, x, tol):
        raise ValueError("base point is not on the surface")
    _check_orthonormal(u1, v2)
    return ConicFiber(
        a=float(S.Q(u1)),
        b=float(S.bilinear(u1, v2)),
        c=float(S.Q(v2)),
        p=float(S.bilinear(x, u1) + u1 @ S.v),
        q=float(S.bilinear(x, v2) + v2 @ S.v),
    )


def discriminant(S: QuadricSurface, u1, v2) -> float:
    return float(S.Q(u1) * S.Q(v2) - S.bilinear(u1, v2) ** 2)


def classify_general_conic(a, b, c, p, q, f=0.0, tol: float = CLASSIFY_TOL) -> ConicClass:
    """Real locus type of ``a s^2 + 2b st + c t^2 + 2p s + 2q t + f = 0``."""
    coeffs = np.array([a, b, c, p, q, f], dtype=float)
    m = np.abs(coeffs).max()
    if m == 0:
        return ConicClass.PLANE
    a, b, c, p, q, f = coeffs / m
    if max(abs(a), abs(b), abs(c)) <= tol:
        if max(abs(p), abs(q)) <= tol:
            return ConicClass.EMPTY  # nonzero constant only
        return ConicClass.LINE
    M = np.array([[a, b, p], [b, c, q], [p, q, f]])
    sv = np.linalg.svd(M, compute_uv=False)
    rank = int(np.sum(sv > tol * sv[0]))
    delta = a * c - b * b
    if delta > tol:
        if rank < 3:
            return ConicClass.POINT
        # real ellipse iff the trace of the form and det(M) have opposite signs
        return ConicClass.ELLIPSE if (a + c) * np.linalg.det(M) < 0 else ConicClass.EMPTY
    if delta < -tol:
        return ConicClass.HYPERBOLA if rank == 3 else ConicClass.INTERSECTING_LINES
    if rank == 3:
        return ConicClass.PARABOLA
    if rank == 2:
        cof = (a * f - p * p) + (c * f - q * q)
        return ConicClass.PARALLEL_LINES if cof < 0 else ConicClass.EMPTY
    return ConicClass.SINGLE_LINE


def classify_conic(f: ConicFiber, tol: float = CLASSIFY_TOL) -> ConicClass:
    return classify_general_conic(f.a, f.b, f.c, f.p, f.q, 0.0, tol)


def decompose_direction(u1, u2) -> tuple[float, np.ndarray]:
    """Write ``u2 = cos(theta) u1 + sin(theta) v2`` with ``v2`` a unit vector orthogonal to ``u1``."""
    u1, u2 = _as_vector(u1, "u1"), _as_vector(u2, "u2")
    u1 = u1 / np.linalg.norm(u1)
    u2 = u2 / np.linalg.norm(u2)
    c = float(u1 @ u2)
    w = u2 - c * u1
    sn = float(np.linalg.norm(w))
    if sn <= 1e-12:
        raise ValueError("u2 is parallel to u1")
    return math.atan2(sn, c), w / sn


# --- global normal forms -------------------------------------------------------------------


def _eigh_sorted(B: np.ndarray, tol: float):
    lam, R = np.linalg.eigh(B)
    scale_ = max(np.abs(lam).max(), 1e-300)
    lam = np.where(np.abs(lam) <= tol * scale_, 0.0, lam)
    # positive eigenvalues first, then negative, then zero
    order = np.lexsort((np.abs(lam), np.select([lam > 0, lam < 0], [0, 1], 2)))
    return lam[order], R[:, order]


@dataclass(frozen=True)
class NormalForm:
    """Affine chart ``z = A x + b`` carrying a full-rank quadric onto ``diag(I_p, -I_q)`` at level ``level``.

    ``level`` is one of -1, 0, 1 and ``p <= q`` is not enforced here.
    """

    p: int
    q: int
    level: float
    A: np.ndarray
    b: np.ndarray
    flipped: bool = False

    @property
    def surface(self) -> QuadricSurface:
        return QuadricSurface.diagonal(self.p, self.q, self.level)

    def forward(self, x) -> np.ndarray:
        return np.asarray(x, float) @ self.A.T + self.b

    def inverse(self, z) -> np.ndarray:
        return np.linalg.solve(self.A, (np.asarray(z, float) - self.b).T).T

    def transport_hyperplane(self, H: Hyperplane) -> Hyperplane:
        """Image of ``H`` under ``A^{-T}``, the action on frequency space."""
        Au = self.A @ H.u
        n = np.linalg.norm(Au)
        return Hyperplane(Au / n, H.s / n)


def full_rank_normal_form(S: QuadricSurface, tol: float = CLASSIFY_TOL) -> Optional[NormalForm]:
    """Normal form for surfaces with invertible ``B``; ``None`` if ``B`` is singular."""
    lam, R = _eigh_sorted(S.B, tol)
    if np.any(lam == 0):
        return None
    center = -np.linalg.solve(S.B, S.v)
    completion = float(S.v @ np.linalg.solve(S.B, S.v))
    level = S.rho + completion
    flipped = False
    if abs(level) <= tol * max(1.0, abs(S.rho), abs(completion)):
        level = 0.0
    if level < 0 or (level == 0 and np.sum(lam > 0) > np.sum(lam < 0)):
        lam, level, flipped = -lam, -level, True
        order = np.argsort(-np.sign(lam), kind="stable")
        lam, R = lam[order], R[:, order]
    denom = level if level > 0 else 1.0
    D = np.diag(np.sqrt(np.abs(lam) / denom))
    A = D @ R.T
    p = int(np.sum(lam > 0))
    return NormalForm(p, S.d - p, 1.0 if level > 0 else 0.0, A, -A @ center, flipped)


def quadric_point(B, v, rho, tol: float = CLASSIFY_TOL) -> Optional[np.ndarray]:
    """Some real solution of ``x^T B x + 2<v,x> = rho`` (any dimension >= 1), or ``None`` if empty."""
    B = np.atleast_2d(np.asarray(B, float))
    v = np.atleast_1d(np.asarray(v, float))
    d = B.shape[0]
    B = 0.5 * (B + B.T)
    if d == 0:
        return None
    lam, R = np.linalg.eigh(B)
    big = max(np.abs(lam).max(), np.abs(v).max(), abs(rho), 1e-300)
    w = R.T @ v
    zero = np.abs(lam) <= tol * big
    z = np.zeros(d)
    if np.any(zero & (np.abs(w) > tol * big)):
        # a kernel direction with nonzero linear coefficient: solve the linear equation there
        k = int(np.argmax(np.where(zero, np.abs(w), -1)))
        z[k] = rho / (2 * w[k])
        return R @ z
    nz = ~zero
    shift = np.zeros(d)
    shift[nz] = -w[nz] / lam[nz]
    level = rho + float(np.sum(w[nz] ** 2 / lam[nz]))
    if abs(level) <= tol * big:
        return R @ shift
    pick = np.nonzero(nz & (np.sign(lam) == np.sign(level)))[0]
    if pick.size == 0:
        return None
    k = int(pick[0])
    z = shift.copy()
    z[k] += math.sqrt(level / lam[k])
    return R @ z


def classify_surface(S: QuadricSurface, tol: float = CLASSIFY_TOL) -> dict:
    """Global type label and inertia ``(n_plus, n_minus, n_zero)`` of the quadratic part."""
    lam, R = _eigh_sorted(S.B, tol)
    npos, nneg = int(np.sum(lam > 0)), int(np.sum(lam < 0))
    nzero = S.d - npos - nneg
    if quadric_point(S.B, S.v, S.rho, tol) is None:
        kind = "empty"
    elif npos + nneg == 0:
        kind = "hyperplane"
    elif nzero == 0:
        nf = full_rank_normal_form(S, tol)
        if nf.level == 0:
            kind = "point" if min(nf.p, nf.q) == 0 else "cone"
        elif nf.q == 0:
            kind = "ellipsoid"
        else:
            kind = "hyperboloid"
    else:
        w = R.T @ S.v
        if np.any(np.abs(w[lam == 0]) > tol * max(1.0, np.abs(S.v).max())):
            kind = "paraboloid" if nneg == 0 or npos == 0 else "hyperbolic paraboloid"
        else:
            kind = "cylinder"
    return {"type": kind, "signature": [npos, nneg, nzero]}


def sample_surface_point(S: QuadricSurface, rng: np.random.Generator, retries: int = 64) -> np.ndarray:
    """Random point of ``S`` found by intersecting random lines with the surface."""
    for _ in range(retries):
        base = rng.normal(size=S.d)
        w = rng.normal(size=S.d)
        w /= np.linalg.norm(w)
        qa = float(S.Q(w))
        qb = float(S.bilinear(base, w) + w @ S.v)
        qc = eval_p(S, base)
        if abs(qa) <= 1e-12 * S.norm_B:
            if abs(qb) <= 1e-12:
                continue
            t = -qc / (2 * qb)
        else:
            disc = qb * qb - qa * qc
            if disc < 0:
                continue
            r = math.sqrt(disc)
            t = (-qb + (r if rng.random() < 0.5 else -r)) / qa
        x = base + t * w
        if on_surface(S, x, 1e-10):
            return x
    x = quadric_point(S.B, S.v, S.rho)
    if x is None:
        raise ValueError("surface appears to be empty")
    return x
