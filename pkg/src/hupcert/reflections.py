"""Q-reflections along a direction, their adjoints, and the fixed loci of isotropic directions."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .quadrics import QuadricSurface, eval_p, on_surface, scale

ISOTROPY_TOL = 1e-10
FIBER_LINE = "fiber-line"


def is_isotropic(S: QuadricSurface, u, tol: float = ISOTROPY_TOL) -> bool:
    u = np.asarray(u, float)
    u = u / np.linalg.norm(u)
    return abs(float(S.Q(u))) <= tol * S.norm_B


@dataclass(frozen=True, eq=False)
class QReflection:
    """The involution ``x -> x - 2 (B(x,u) + <v,u>) / Q(u) u`` of a surface."""

    surface: QuadricSurface
    u: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float)
        if u.shape != (self.surface.d,):
            raise ValueError("direction has the wrong dimension")
        u = u / np.linalg.norm(u)
        if is_isotropic(self.surface, u):
            raise ValueError("reflection undefined for an isotropic direction (Q(u) = 0)")
        u.setflags(write=False)
        object.__setattr__(self, "u", u)

    @property
    def Qu(self) -> float:
        return float(self.surface.Q(self.u))

    @property
    def linear(self) -> np.ndarray:
        """Matrix of the linear part ``I - 2 u (B u)^T / Q(u)``."""
        Bu = self.surface.B @ self.u
        return np.eye(self.surface.d) - 2.0 * np.outer(self.u, Bu) / self.Qu

    @property
    def offset(self) -> np.ndarray:
        return -2.0 * float(self.surface.v @ self.u) / self.Qu * self.u

    def __call__(self, x) -> np.ndarray:
        return q_reflect(self, x)


def q_reflect(R: QReflection, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    S, u = R.surface, R.u
    coef = (x @ (S.B @ u) + float(S.v @ u)) / R.Qu
    return x - 2.0 * np.multiply.outer(coef, u)


def linear_adjoint(R: QReflection, xi) -> np.ndarray:
    """Transpose of the linear part applied to ``xi`` (defined whatever ``v`` is)."""
    xi = np.asarray(xi, dtype=float)
    Bu = R.surface.B @ R.u
    return xi - 2.0 * np.multiply.outer(xi @ R.u, Bu) / R.Qu


def adjoint_reflect(R: QReflection, xi) -> np.ndarray:
    if np.any(R.surface.v != 0):
        raise ValueError("the adjoint is defined for linear reflections only (v = 0)")
    return linear_adjoint(R, xi)


def fiber_partner(S: QuadricSurface, u, x, tol: float = 1e-9):
    """Points ``y`` of ``S`` with ``pi_u(y) = pi_u(x)``.

    Returns a list of one or two points, or ``FIBER_LINE`` when ``u`` is isotropic and
    the whole line ``x + R u`` lies in the surface.
    """
    x = np.asarray(x, dtype=float)
    if not on_surface(S, x, tol):
        raise ValueError("point is not on the surface")
    u = np.asarray(u, dtype=float)
    u = u / np.linalg.norm(u)
    lin = float(S.bilinear(x, u) + S.v @ u)
    if is_isotropic(S, u):
        if abs(lin) <= tol * max(1.0, scale(S, x)):
            return FIBER_LINE
        return [x]
    y = q_reflect(QReflection(S, u), x)
    if np.linalg.norm(y - x) <= 1e-12 * (1 + np.linalg.norm(x)):
        return [x]
    return [x, y]


def in_Eu(S: QuadricSurface, u, x, tol: float = 1e-9) -> bool:
    u = np.asarray(u, dtype=float)
    u = u / np.linalg.norm(u)
    if not is_isotropic(S, u, max(tol, ISOTROPY_TOL)):
        raise ValueError("E_u is only defined for isotropic directions")
    x = np.asarray(x, dtype=float)
    return abs(float(S.bilinear(x, u) + S.v @ u)) <= tol * max(1.0, scale(S, x))


class EuKind(str, enum.Enum):
    EMPTY = "Empty"
    ZERO_ONLY = "ZeroOnly"
    WITNESS = "Witness"


@dataclass(frozen=True)
class EuIntersection:
    kind: EuKind
    witness: Optional[np.ndarray] = None
    residual: float = 0.0


def _check_diagonal_form(S: QuadricSurface) -> tuple[int, int]:
    diag = np.diag(S.B)
    if np.any(S.B - np.diag(diag)) or np.any(S.v):
        raise ValueError("surface must be in the form diag(I_p, -I_q) with v = 0")
    p = int(np.sum(diag == 1.0))
    if not (np.all(diag[:p] == 1.0) and np.all(diag[p:] == -1.0)):
        raise ValueError("surface must be in the form diag(I_p, -I_q) with v = 0")
    return p, S.d - p


def intersect_Eu_family(S: QuadricSurface, normals: Sequence, tol: float = 1e-10) -> EuIntersection:
    """Decide whether ``S ∩ E_{u_1} ∩ ... ∩ E_{u_k}`` is empty, ``{0}``, or has a nonzero point.

    The linear conditions ``B(x, u_j) = 0`` cut out a subspace ``N``; the restriction of
    ``Q`` to ``N`` is diagonalized and the level equation ``Q(x) = rho`` solved exactly on
    its eigenvectors.
    """
    _check_diagonal_form(S)
    U = np.atleast_2d(np.asarray(normals, dtype=float))
    U = U / np.linalg.norm(U, axis=1, keepdims=True)
    for u in U:
        if not is_isotropic(S, u, max(tol, ISOTROPY_TOL)):
            raise ValueError("all normals must be isotropic")
    rho = S.rho
    A = U @ S.B
    _, sv, Vt = np.linalg.svd(A)
    rank = int(np.sum(sv > 1e-12 * max(1.0, sv.max(initial=0.0))))
    N = Vt[rank:].T
    if N.shape[1] == 0:
        return EuIntersection(EuKind.ZERO_ONLY if rho == 0 else EuKind.EMPTY)
    M = N.T @ S.B @ N
    lam, W = np.linalg.eigh(0.5 * (M + M.T))
    lam_tol = tol * max(1.0, np.abs(lam).max())
    y = None
    if rho > 0 and np.any(lam > lam_tol):
        k = int(np.argmax(lam))
        y = W[:, k] * np.sqrt(rho / lam[k])
    elif rho < 0 and np.any(lam < -lam_tol):
        k = int(np.argmin(lam))
        y = W[:, k] * np.sqrt(rho / lam[k])
    elif rho == 0:
        if np.any(np.abs(lam) <= lam_tol):
            y = W[:, int(np.argmin(np.abs(lam)))]
        elif lam.min() < 0 < lam.max():
            i, j = int(np.argmax(lam)), int(np.argmin(lam))
            y = W[:, i] * np.sqrt(-lam[j]) + W[:, j] * np.sqrt(lam[i])
            y /= np.linalg.norm(y)
    if y is None:
        return EuIntersection(EuKind.ZERO_ONLY if rho == 0 else EuKind.EMPTY)
    x = N @ y
    residual = max(abs(eval_p(S, x)), float(np.abs(A @ x).max()))
    if residual > 1e-9 * max(1.0, scale(S, x)):
        raise ArithmeticError(f"witness failed its residual check ({residual:.3e})")
    return EuIntersection(EuKind.WITNESS, x, residual)
