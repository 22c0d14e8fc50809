"""Finite atomic measures with complex weights and their characteristic functions."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from .quadrics import Hyperplane, QuadricSurface, eval_p, scale
from .reflections import QReflection, is_isotropic, linear_adjoint, q_reflect

MERGE_RADIUS = 1e-9
GRID_POINTS = 64
GRID_EXTENT = 20.0
_CHUNK = 1 << 20


def _merge(atoms: np.ndarray, weights: np.ndarray, radius: float):
    if len(atoms) < 2:
        return atoms, weights
    pairs = cKDTree(atoms).query_pairs(radius, output_type="ndarray")
    if len(pairs) == 0:
        return atoms, weights
    n = len(atoms)
    graph = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n))
    ncomp, labels = connected_components(graph, directed=False)
    first = np.full(ncomp, n)
    np.minimum.at(first, labels, np.arange(n))
    merged_w = np.zeros(ncomp, dtype=complex)
    np.add.at(merged_w, labels, weights)
    return atoms[first], merged_w


class AtomicMeasure:
    """``sum_k w_k delta_{x_k}`` with pairwise distinct atoms ``x_k`` in ``R^d``.

    Atoms closer than ``MERGE_RADIUS`` are merged on construction by adding weights.
    """

    def __init__(self, atoms, weights=None, d: Optional[int] = None, merge_radius: float = MERGE_RADIUS):
        atoms = np.asarray(atoms, dtype=float)
        if atoms.size == 0:
            if d is None:
                d = atoms.shape[1] if atoms.ndim == 2 else None
            if d is None:
                raise ValueError("dimension required for an empty measure")
            atoms = atoms.reshape(0, d)
        if atoms.ndim == 1:
            atoms = atoms[None, :]
        if d is not None and atoms.shape[1] != d:
            raise ValueError("atoms have the wrong dimension")
        if weights is None:
            weights = np.ones(len(atoms))
        weights = np.asarray(weights, dtype=complex).reshape(-1)
        if len(weights) != len(atoms):
            raise ValueError("atoms and weights have different lengths")
        if not (np.all(np.isfinite(atoms)) and np.all(np.isfinite(weights))):
            raise ValueError("atoms and weights must be finite")
        atoms, weights = _merge(atoms, weights, merge_radius)
        atoms.setflags(write=False)
        weights.setflags(write=False)
        self.atoms = atoms
        self.weights = weights

    @classmethod
    def zero(cls, d: int) -> "AtomicMeasure":
        return cls(np.empty((0, d)), np.empty(0), d=d)

    @classmethod
    def dirac(cls, x, w: complex = 1.0) -> "AtomicMeasure":
        return cls(np.asarray(x, float)[None, :], [w])

    @property
    def d(self) -> int:
        return self.atoms.shape[1]

    def __len__(self) -> int:
        return len(self.atoms)

    def __repr__(self) -> str:
        return f"AtomicMeasure(n={len(self)}, d={self.d}, tv={self.total_variation:.6g})"

    @property
    def total_variation(self) -> float:
        return float(np.abs(self.weights).sum())

    @property
    def mass(self) -> complex:
        return complex(self.weights.sum())

    def is_zero(self, tol: float = 0.0) -> bool:
        return bool(np.all(np.abs(self.weights) <= tol))

    def pruned(self, tol: float = 0.0) -> "AtomicMeasure":
        keep = np.abs(self.weights) > tol
        return AtomicMeasure(self.atoms[keep], self.weights[keep], d=self.d)

    def __add__(self, other: "AtomicMeasure") -> "AtomicMeasure":
        if other.d != self.d:
            raise ValueError("dimension mismatch")
        return AtomicMeasure(
            np.vstack([self.atoms, other.atoms]), np.concatenate([self.weights, other.weights]), d=self.d
        )

    def __neg__(self) -> "AtomicMeasure":
        return AtomicMeasure(self.atoms, -self.weights, d=self.d)

    def __sub__(self, other: "AtomicMeasure") -> "AtomicMeasure":
        return self + (-other)

    def __mul__(self, c: complex) -> "AtomicMeasure":
        return AtomicMeasure(self.atoms, complex(c) * self.weights, d=self.d)

    __rmul__ = __mul__

    def char_fn(self, xi) -> complex | np.ndarray:
        return char_fn(self, xi)

    def modulated(self, omega) -> "AtomicMeasure":
        """Weights multiplied by ``exp(i <x, omega>)``; shifts the characteristic function by ``omega``."""
        omega = np.asarray(omega, dtype=float)
        return AtomicMeasure(self.atoms, self.weights * np.exp(1j * (self.atoms @ omega)), d=self.d)

    def pushforward(self, T: Callable[[np.ndarray], np.ndarray]) -> "AtomicMeasure":
        return pushforward_map(self, T)

    def to_dict(self) -> dict:
        return {
            "atoms": self.atoms.tolist(),
            "weights": [{"re": float(w.real), "im": float(w.imag)} for w in self.weights],
        }

    @classmethod
    def from_dict(cls, data: dict, d: Optional[int] = None) -> "AtomicMeasure":
        atoms = np.asarray(data.get("atoms", []), dtype=float)
        ws = []
        for w in data.get("weights", []):
            if isinstance(w, dict):
                ws.append(complex(w.get("re", 0.0), w.get("im", 0.0)))
            else:
                ws.append(complex(w))
        if atoms.size == 0 and d is None:
            d = data.get("d")
        return cls(atoms, np.asarray(ws, dtype=complex), d=d)


def char_fn(mu: AtomicMeasure, xi) -> complex | np.ndarray:
    """``sum_k w_k exp(i <x_k, xi>)`` at one frequency or an ``(m, d)`` batch."""
    xi = np.asarray(xi, dtype=float)
    if xi.shape[-1] != mu.d:
        raise ValueError(f"frequency has dimension {xi.shape[-1]}, measure has {mu.d}")
    if len(mu) == 0:
        return 0j if xi.ndim == 1 else np.zeros(xi.shape[:-1], dtype=complex)
    if xi.ndim == 1:
        return complex(np.exp(1j * (mu.atoms @ xi)) @ mu.weights)
    flat = xi.reshape(-1, mu.d)
    out = np.empty(len(flat), dtype=complex)
    step = max(1, _CHUNK // max(1, len(mu)))
    for i in range(0, len(flat), step):
        out[i : i + step] = np.exp(1j * (flat[i : i + step] @ mu.atoms.T)) @ mu.weights
    return out.reshape(xi.shape[:-1])


def measure_distance(mu: AtomicMeasure, nu: AtomicMeasure) -> float:
    """Total variation of ``mu - nu`` after merging coincident atoms."""
    return (mu - nu).total_variation


def measures_equal(mu: AtomicMeasure, nu: AtomicMeasure, tol: float = 1e-8) -> bool:
    return measure_distance(mu, nu) <= tol * max(1.0, mu.total_variation, nu.total_variation)


def modulate(mu: AtomicMeasure, u, s: float) -> AtomicMeasure:
    """``d nu = exp(i s <x, u>) d mu``, so that ``nu^(xi) = mu^(xi + s u)``."""
    u = np.asarray(u, dtype=float)
    return mu.modulated(s * u / np.linalg.norm(u))


@dataclass(frozen=True, eq=False)
class AffineMap:
    """``x -> A x + b`` acting on row vectors."""

    A: np.ndarray
    b: Optional[np.ndarray] = None

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        b = np.zeros(A.shape[0]) if self.b is None else np.asarray(self.b, dtype=float)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)

    def __call__(self, x) -> np.ndarray:
        return np.asarray(x, float) @ self.A.T + self.b

    def compose(self, inner: "AffineMap") -> "AffineMap":
        """``self ∘ inner``."""
        return AffineMap(self.A @ inner.A, self.A @ inner.b + self.b)

    def inverse(self) -> "AffineMap":
        Ainv = np.linalg.inv(self.A)
        return AffineMap(Ainv, -Ainv @ self.b)

    @classmethod
    def identity(cls, d: int) -> "AffineMap":
        return cls(np.eye(d))


def pushforward_map(mu: AtomicMeasure, T: Callable[[np.ndarray], np.ndarray]) -> AtomicMeasure:
    images = np.asarray(T(mu.atoms), dtype=float)
    if len(mu) == 0:
        dim = T(np.zeros((1, mu.d))).shape[-1]
        return AtomicMeasure.zero(dim)
    return AtomicMeasure(images.reshape(len(mu), -1), mu.weights)


def project_to_hyperplane(mu: AtomicMeasure, H: Hyperplane, basis: Optional[np.ndarray] = None) -> AtomicMeasure:
    """Push-forward under orthogonal projection onto ``H`` (through 0), in coordinates of ``basis``."""
    if H.s != 0:
        raise ValueError("projection target must pass through the origin")
    E = H.basis() if basis is None else np.asarray(basis, dtype=float)
    if len(mu) == 0:
        return AtomicMeasure.zero(E.shape[1])
    return AtomicMeasure(mu.atoms @ E, mu.weights, d=E.shape[1])


@dataclass(frozen=True, eq=False)
class GridSpec:
    """A square grid ``origin + sum_j c_j e_j`` with ``c_j`` in ``[-half_extent, half_extent]``."""

    origin: np.ndarray
    directions: np.ndarray
    half_extent: float = GRID_EXTENT
    points_per_axis: int = GRID_POINTS

    def __post_init__(self):
        dirs = np.atleast_2d(np.asarray(self.directions, dtype=float))
        if self.points_per_axis < 2:
            raise ValueError("need at least two points per axis")
        if not np.allclose(dirs @ dirs.T, np.eye(len(dirs)), atol=1e-10):
            raise ValueError("grid directions must be orthonormal")
        object.__setattr__(self, "origin", np.asarray(self.origin, dtype=float))
        object.__setattr__(self, "directions", dirs)

    def points(self) -> np.ndarray:
        ticks = np.linspace(-self.half_extent, self.half_extent, self.points_per_axis)
        mesh = np.meshgrid(*([ticks] * len(self.directions)), indexing="ij")
        coeffs = np.stack([m.ravel() for m in mesh], axis=1)
        return self.origin + coeffs @ self.directions

    @classmethod
    def on_hyperplane(cls, H: Hyperplane, points_per_axis: int = GRID_POINTS, half_extent: float = GRID_EXTENT):
        return cls(H.s * H.u, H.basis().T, half_extent, points_per_axis)


@dataclass(frozen=True)
class VanishingReport:
    max_abs: float
    argmax: np.ndarray
    passed: bool

    def to_dict(self) -> dict:
        return {"max_abs": self.max_abs, "argmax": self.argmax.tolist(), "pass": self.passed}


def verify_vanishing(
    mu: AtomicMeasure, H: Hyperplane, grid: Optional[GridSpec] = None, tol: float = 1e-10
) -> VanishingReport:
    """Largest ``|mu^|`` over a grid on ``H``; passes iff it is at most ``tol * TV(mu)``."""
    grid = GridSpec.on_hyperplane(H) if grid is None else grid
    if abs(float(grid.origin @ H.u) - H.s) > 1e-9 * max(1.0, abs(H.s)) or np.abs(grid.directions @ H.u).max() > 1e-10:
        raise ValueError("grid does not lie in the hyperplane")
    pts = grid.points()
    vals = np.abs(char_fn(mu, pts))
    k = int(np.argmax(vals))
    m = float(vals[k])
    return VanishingReport(m, pts[k], m <= tol * mu.total_variation)


@dataclass(frozen=True)
class FundReport:
    """Deviations in the push-forward antisymmetry and the transformed-frequency identity.

    Both are normalized by the total variation of the measure.
    """

    pushforward_deviation: float
    frequency_deviation: float

    def passed(self, tol: float = 1e-10) -> bool:
        return self.pushforward_deviation < tol and self.frequency_deviation < tol


def check_fund_equivalences(
    S: QuadricSurface,
    mu: AtomicMeasure,
    H: Hyperplane,
    samples: int = 100,
    rng: Optional[np.random.Generator] = None,
    spread: float = GRID_EXTENT,
) -> FundReport:
    """Check ``R_* nu = -nu`` for ``nu = e^{is<x,u>} mu`` and the matching identity for ``mu^``."""
    if is_isotropic(S, H.u):
        raise ValueError("isotropic normal: no reflection")
    rng = np.random.default_rng(0) if rng is None else rng
    tv = max(mu.total_variation, 1e-300)
    R = QReflection(S, H.u)
    u, s = H.u, H.s
    nu = modulate(mu, u, s)
    dev_push = (nu.pushforward(lambda x: q_reflect(R, x)) + nu).total_variation / tv
    xi = rng.uniform(-spread, spread, size=(samples, S.d))
    lhs = char_fn(mu, xi + s * u)
    phase = np.exp(-2j * float(u @ S.v) * (xi @ u) / R.Qu)
    rhs = -phase * char_fn(mu, linear_adjoint(R, xi) + s * u)
    dev_freq = float(np.abs(lhs - rhs).max()) / tv if samples else 0.0
    return FundReport(dev_push, dev_freq)


def apply_PD(S: QuadricSurface, mu: AtomicMeasure, xi) -> complex | np.ndarray:
    """``P(D) mu^ (xi) = sum_k w_k P(x_k) exp(i <x_k, xi>)``."""
    if len(mu) == 0:
        return char_fn(mu, xi)
    weighted = AtomicMeasure(mu.atoms, mu.weights * eval_p(S, mu.atoms), d=mu.d, merge_radius=0.0)
    return char_fn(weighted, xi)


def surface_support_residual(S: QuadricSurface, mu: AtomicMeasure) -> float:
    """Largest relative residual ``|P(x_k)| / max(1, scale)`` over the atoms."""
    if len(mu) == 0:
        return 0.0
    return float((np.abs(eval_p(S, mu.atoms)) / np.maximum(1.0, scale(S, mu.atoms))).max())
