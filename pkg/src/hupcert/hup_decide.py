"""Uniqueness decisions for a quadric surface against a finite union of hyperplanes in frequency space.

Every NOT_HUP verdict carries an atomic measure that has been checked to live on the surface
and to have a characteristic function vanishing on each hyperplane of the family.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .conic2d import decide_2d
from .counterexamples import (
    CertificateError,
    certify,
    chord_pair,
    dihedral_orbit,
    find_moving_point,
    isotropic_box,
    lift_fiber_certificate,
    line_product,
    orbit_antisymmetrization,
    restricted_point,
    sphere_lattice,
    two_point,
)
from .coxeter import Finite, Inconclusive, Infinite, ReflectionSet, is_infinite, line_angle
from .decision import Decision, Verdict
from .measures import AtomicMeasure, modulate
from .quadrics import (
    ConicClass,
    Hyperplane,
    QuadricSurface,
    classify_conic,
    decompose_direction,
    discriminant,
    fiber_conic,
    full_rank_normal_form,
    quadric_point,
    sample_surface_point,
)
from .rational import ANGLE_TOL, MAXDEN, IrrationalUpTo, integer_relation, rational_angle, rational_approx
from .reflections import EuKind, _check_diagonal_form, intersect_Eu_family, is_isotropic

MAX_GRID_POINTS = 1 << 18
FIBER_SAMPLES = 16
FIBER_RETRIES = 64
CHORD_MULTIPLES = 8
SUBFAMILY_LIMIT = 200

# fibers of these classes represent the generic case for their discriminant sign
_GENERIC = (ConicClass.ELLIPSE, ConicClass.HYPERBOLA, ConicClass.PARABOLA)


@dataclass(frozen=True)
class Settings:
    maxden: int = MAXDEN
    angle_tol: float = ANGLE_TOL
    tol: float = 1e-10
    points_per_axis: int = 64
    half_extent: float = 20.0
    rng: np.random.Generator = field(default_factory=lambda: np.random.default_rng(0), compare=False)

    def grid_axis(self, d: int) -> int:
        """Points per axis on a ``(d-1)``-dimensional hyperplane grid, capped at ``MAX_GRID_POINTS`` in total."""
        if d <= 2:
            return self.points_per_axis
        return max(2, min(self.points_per_axis, int(MAX_GRID_POINTS ** (1.0 / (d - 1)) + 1e-9)))


def _settings(cfg: Optional[Settings], rng=None, **overrides) -> Settings:
    cfg = Settings() if cfg is None else cfg
    if rng is not None:
        overrides["rng"] = rng
    overrides = {k: v for k, v in overrides.items() if v is not None}
    return replace(cfg, **overrides) if overrides else cfg


def _finish(mu, S, hyperplanes, rule: str, cfg: Settings, notes=()) -> Decision:
    """NOT_HUP if ``mu`` passes every soundness check, UNDECIDED otherwise."""
    try:
        certify(mu, hyperplanes, S, cfg.tol, cfg.grid_axis(S.d), cfg.half_extent)
    except CertificateError as exc:
        return Decision(Verdict.UNDECIDED, rule, notes=[*notes, f"certificate rejected: {exc}"])
    return Decision(Verdict.NOT_HUP, rule, mu, list(notes))


def certificate_is_sound(mu: AtomicMeasure, S: QuadricSurface, hyperplanes, cfg: Optional[Settings] = None) -> bool:
    """Independent re-check: atoms on ``S``, nonzero, transform vanishing on every hyperplane."""
    cfg = _settings(cfg)
    try:
        certify(mu, hyperplanes, S, cfg.tol, cfg.grid_axis(S.d), cfg.half_extent)
    except CertificateError:
        return False
    return True


def _is_empty(S: QuadricSurface) -> bool:
    return quadric_point(S.B, S.v, S.rho) is None


def _fixed_line_point(S: QuadricSurface, u) -> Optional[np.ndarray]:
    """A point of ``E_u ∩ S`` for isotropic ``u``; the line through it along ``u`` lies in ``S``."""
    u = np.asarray(u, float)
    Bu = S.B @ u
    c = -float(S.v @ u)
    if np.linalg.norm(Bu) <= 1e-12 * max(1.0, S.norm_B):
        if abs(c) > 1e-12 * max(1.0, np.abs(S.v).max()):
            return None
        return quadric_point(S.B, S.v, S.rho)
    return restricted_point(S, Bu, c)


def _is_diagonal_form(S: QuadricSurface) -> bool:
    try:
        _check_diagonal_form(S)
    except ValueError:
        return False
    return True


# --- single hyperplane --------------------------------------------------------------------


def decide_single(S: QuadricSurface, H: Hyperplane, cfg: Optional[Settings] = None, rng=None) -> Decision:
    cfg = _settings(cfg, rng)
    if _is_empty(S):
        return Decision(Verdict.HUP, "empty", notes=["the surface has no real points"])
    if not is_isotropic(S, H.u):
        x = find_moving_point(S, H.u, cfg.rng)
        if x is not None:
            return _finish(two_point(S, H, x), S, [H], "cor:c(ii)", cfg, ["reflected point pair"])
        return Decision(
            Verdict.HUP,
            "cor:c(i)",
            notes=["every sampled point is fixed by the reflection, so projection along u is one-to-one on S"],
        )
    x = _fixed_line_point(S, H.u)
    if x is None:
        return Decision(Verdict.HUP, "cor:c(iii)", notes=["isotropic normal and E_u ∩ S is empty"])
    mu = line_product(x, H.u, [H.s])
    notes = ["isotropic normal: the line x + R u lies in S", "absolutely continuous measures: HUP iff E_u is null in S"]
    return _finish(mu, S, [H], "cor:c(iii)", cfg, notes)


# --- two intersecting hyperplanes -----------------------------------------------------------


def _fiber_samples(S: QuadricSurface, u1, v2, rng) -> dict:
    seen: dict = {}
    kept = 0
    for _ in range(FIBER_RETRIES):
        try:
            x = sample_surface_point(S, rng)
        except ValueError:
            break
        f = fiber_conic(S, x, u1, v2)
        cls = classify_conic(f)
        if cls is ConicClass.PLANE:
            continue
        seen.setdefault(cls, (x, f))
        kept += 1
        if kept >= FIBER_SAMPLES and any(c in seen for c in _GENERIC):
            break
    return seen


def decide_two_intersecting(
    S: QuadricSurface, H1: Hyperplane, H2: Hyperplane, cfg: Optional[Settings] = None, rng=None
) -> Decision:
    """Reduce to the planar problem on fibers ``x + span(u1, v2)`` and lift any fiber certificate."""
    cfg = _settings(cfg, rng)
    if H1.s != 0 or H2.s != 0:
        raise ValueError("both hyperplanes must pass through the origin")
    if is_isotropic(S, H1.u) or is_isotropic(S, H2.u):
        raise ValueError("isotropic normal")
    theta, v2 = decompose_direction(H1.u, H2.u)
    if theta <= 1e-12 or math.pi - theta <= 1e-12:
        raise ValueError("normals are parallel")
    u1 = H1.u
    seen = _fiber_samples(S, u1, v2, cfg.rng)
    if not seen:
        return Decision(Verdict.HUP, "empty", notes=["the surface has no real points"])
    # frequency lines inside the fiber plane, in coordinates (s, t) along (u1, v2)
    lines = ([0.0, 1.0], [-math.sin(theta), math.cos(theta)])
    delta = discriminant(S, u1, v2)
    order = sorted(seen, key=lambda c: c not in _GENERIC)
    notes = [f"fiber discriminant {delta:.6g}", "fiber classes: " + ", ".join(c.value for c in order)]
    decisions = {}
    for cls in order:
        x, f = seen[cls]
        decisions[cls] = decide_2d(f.as_surface(), *lines, maxden=cfg.maxden, tol=cfg.angle_tol)
    for cls in order:
        D = decisions[cls]
        if D.verdict is Verdict.NOT_HUP:
            x, f = seen[cls]
            try:
                mu = lift_fiber_certificate(S, x, u1, v2, D.certificate)
            except CertificateError as exc:
                return Decision(Verdict.UNDECIDED, D.rule, notes=[*notes, f"lift failed: {exc}"])
            return _finish(mu, S, [H1, H2], D.rule, cfg, [*notes, *D.notes, f"certificate on one {cls.value} fiber"])
    lead = decisions[order[0]]
    undecided = [c for c in order if decisions[c].verdict is Verdict.UNDECIDED]
    if undecided:
        return Decision(Verdict.UNDECIDED, lead.rule, notes=[*notes, *decisions[undecided[0]].notes])
    return Decision(Verdict.HUP, lead.rule, notes=[*notes, *lead.notes], maxden=lead.maxden)


# --- parallel families ----------------------------------------------------------------------


def _offset_unit(offsets: Sequence[float], maxden: int, tol: float = ANGLE_TOL) -> Optional[float]:
    """Largest ``g > 0`` with every ``s_j - s_1`` an integer multiple of ``g``, or ``None``."""
    diffs = [float(s) - float(offsets[0]) for s in offsets[1:]]
    ref = diffs[0]
    lcm = 1
    for dj in diffs[1:]:
        r = dj / ref
        verdict = rational_approx(r, maxden, tol * max(1.0, abs(r)))
        if isinstance(verdict, IrrationalUpTo):
            return None
        lcm = lcm * verdict.q // math.gcd(lcm, verdict.q)
    return abs(ref) / lcm


def _chord_certificate(S, u, offsets, cfg: Settings):
    g = _offset_unit(offsets, cfg.maxden)
    if g is None:
        return None
    for k in range(1, CHORD_MULTIPLES + 1):
        mu = chord_pair(S, u, offsets, 2 * math.pi * k / g)
        if mu is not None:
            return mu
    return None


def _check_offsets(offsets) -> list:
    offsets = [float(s) for s in offsets]
    if len(set(offsets)) != len(offsets):
        raise ValueError("offsets must be distinct")
    return offsets


def decide_parallel_family(
    S: QuadricSurface, u, offsets: Sequence[float], cfg: Optional[Settings] = None, rng=None
) -> Decision:
    """Three parallel hyperplanes ``H_{u, s_j}`` against ``Q(x) = rho`` with ``Q = diag(I_p, -I_q)``."""
    cfg = _settings(cfg, rng)
    if len(offsets) != 3:
        raise ValueError("exactly three offsets are required")
    offsets = _check_offsets(offsets)
    _check_diagonal_form(S)
    u = np.asarray(u, float) / np.linalg.norm(u)
    if is_isotropic(S, u):
        raise ValueError("normal must be non-isotropic")
    hyperplanes = [Hyperplane(u, s) for s in offsets]
    rel = integer_relation(offsets[1] - offsets[0], offsets[2] - offsets[0], cfg.maxden, cfg.angle_tol)
    if rel is None:
        return Decision(
            Verdict.HUP,
            "parallel-hyperplanes",
            notes=[f"offset differences admit no integer relation with coefficients up to {cfg.maxden}"],
            maxden=cfg.maxden,
        )
    notes = [f"offset differences satisfy {rel[0]}*(s2-s1) + {rel[1]}*(s3-s1) = 0"]
    mu = _chord_certificate(S, u, offsets, cfg)
    if mu is not None:
        return _finish(mu, S, hyperplanes, "chord-pair", cfg, [*notes, "two atoms on a chord along u"])
    return Decision(Verdict.UNDECIDED, "parallel-hyperplanes", notes=[*notes, "no commensurate chord found"])


def _threshold_note(separation: float, hup: bool) -> Optional[str]:
    stated = separation > math.pi / 2
    if stated == hup:
        return None
    predicted = "HUP" if stated else "NOT_HUP"
    actual = "HUP" if hup else "NOT_HUP"
    return (
        f"threshold discrepancy: the criterion |s1-s2| > pi/2 predicts {predicted} at |s1-s2| = {separation:.6g}; "
        f"the lattice construction gives {actual} (admissible iff |s1-s2| >= pi)"
    )


def decide_sphere_parallel(u, offsets: Sequence[float], cfg: Optional[Settings] = None, rng=None) -> Decision:
    """Two or three parallel hyperplanes ``H_{u, s_j}`` against the unit sphere."""
    cfg = _settings(cfg, rng)
    u = np.asarray(u, float)
    u = u / np.linalg.norm(u)
    d = len(u)
    S = QuadricSurface.sphere(d)
    offsets = _check_offsets(offsets)
    hyperplanes = [Hyperplane(u, s) for s in offsets]
    if len(offsets) == 2:
        sep = abs(offsets[1] - offsets[0])
        half = sep / 2
        hup = math.pi / (2 * half) > 1.0
        notes = [n for n in [_threshold_note(sep, hup)] if n]
        if hup:
            return Decision(Verdict.HUP, "sphere-parallel(ii)", notes=["no admissible lattice height", *notes])
        centre = (offsets[0] + offsets[1]) / 2
        nu = sphere_lattice(u, half, d, k=1)
        mu = modulate(nu, u, -centre)
        return _finish(mu, S, hyperplanes, "sphere-parallel(ii)", cfg, ["lattice atoms at height pi/(2s)", *notes])
    if len(offsets) != 3:
        raise ValueError("two or three offsets are required")
    g = _offset_unit(offsets, cfg.maxden, cfg.angle_tol)
    if g is None:
        return Decision(
            Verdict.HUP,
            "sphere-parallel(iii)",
            notes=[f"offset differences admit no integer relation with coefficients up to {cfg.maxden}"],
            maxden=cfg.maxden,
        )
    mu = _chord_certificate(S, u, offsets, cfg)
    if mu is not None:
        return _finish(mu, S, hyperplanes, "chord-pair", cfg, ["two atoms on a chord along u"])
    return Decision(
        Verdict.UNDECIDED, "sphere-parallel(iii)", notes=[f"commensurate offsets, chord 2*pi/{g:.6g} exceeds the diameter"]
    )


# --- isotropic and concurrent families ------------------------------------------------------


def decide_isotropic_family(S: QuadricSurface, normals, cfg: Optional[Settings] = None, rng=None) -> Decision:
    """Hyperplanes ``H_{u_j}`` through the origin with isotropic normals, on ``diag(I_p, -I_q)`` at level rho.

    A vanishing transform forces the support into ``N ∩ S`` with ``N = {B(x, u_j) = 0}`` and
    each push-forward along ``u_j`` to be zero. If two normals are not Q-orthogonal, a line
    along one of them meets ``N`` once, the push-forward is injective and only 0 survives.
    Otherwise ``N ∩ S`` is invariant under the span of the normals and carries a box measure.
    """
    cfg = _settings(cfg, rng)
    p, _ = _check_diagonal_form(S)
    U = np.atleast_2d(np.asarray(normals, float))
    U = U / np.linalg.norm(U, axis=1, keepdims=True)
    result = intersect_Eu_family(S, U)
    if result.kind is EuKind.EMPTY or (result.kind is EuKind.ZERO_ONLY and S.rho != 0):
        return Decision(Verdict.HUP, "prop:iso2(ii)", notes=["the sets E_u have empty intersection"])
    G = U @ S.B @ U.T
    i, j = np.unravel_index(int(np.argmax(np.abs(G))), G.shape)
    if abs(G[i, j]) > 1e-10 * max(1.0, S.norm_B):
        return Decision(
            Verdict.HUP,
            "isotropic-injective",
            notes=[
                f"B(u_{i + 1}, u_{j + 1}) = {G[i, j]:.6g}: projection along u_{i + 1} is one-to-one "
                "on the intersection of the sets E_u"
            ],
        )
    x = result.witness if result.kind is EuKind.WITNESS else np.zeros(S.d)
    rule = "prop:iso2(iii)" if len(U) < p else "prop:iso2(ii)"
    try:
        mu = isotropic_box(S, x, U)
    except CertificateError as exc:
        return Decision(Verdict.UNDECIDED, rule, notes=[f"box construction failed: {exc}"])
    return _finish(mu, S, [Hyperplane(u) for u in U], rule, cfg, ["normals span a totally isotropic subspace"])


def _dihedral_from_angles(normals: np.ndarray, cfg: Settings):
    """Order parameter ``L`` of the planar reflection group, or ``None`` if some angle is irrational."""
    L = 1
    for n in normals[1:]:
        verdict = rational_angle(line_angle(normals[0], n), cfg.maxden, cfg.angle_tol)
        if isinstance(verdict, IrrationalUpTo):
            return None
        L = L * verdict.q // math.gcd(L, verdict.q)
    return L


def decide_sphere_concurrent(hyperplanes: Sequence[Hyperplane], cfg: Optional[Settings] = None, rng=None) -> Decision:
    cfg = _settings(cfg, rng)
    if not hyperplanes:
        raise ValueError("at least one hyperplane is required")
    if any(H.s != 0 for H in hyperplanes):
        raise ValueError("hyperplanes must pass through the origin")
    normals = np.array([H.u for H in hyperplanes])
    d = normals.shape[1]
    S = QuadricSurface.sphere(d)
    rs = ReflectionSet(normals)
    if d == 2:
        L = _dihedral_from_angles(rs.normals, cfg)
        if L is None:
            return Decision(
                Verdict.HUP, "th:cox", notes=["a pair of lines meets at an angle outside pi*Q"], maxden=cfg.maxden
            )
        mu = dihedral_orbit(rs.normals[0], L)
        return _finish(mu, S, hyperplanes, "th:cox", cfg, [f"dihedral group of order {2 * L}"])
    verdict = is_infinite(rs, maxden=cfg.maxden, tol=cfg.angle_tol)
    if isinstance(verdict, Infinite):
        kind = verdict.to_dict()["witness"]["kind"]
        notes = [f"infinite reflection group ({kind} witness)"]
        if kind == "root_overflow":
            notes.append("root count exceeded the cap; infiniteness is cap-relative")
        return Decision(Verdict.HUP, "th:cox", notes=notes, maxden=cfg.maxden)
    if isinstance(verdict, Inconclusive):
        return Decision(Verdict.UNDECIDED, "th:cox", notes=[f"group closure exceeded {verdict.cap} elements"])
    assert isinstance(verdict, Finite)
    mu = orbit_antisymmetrization(verdict, rng=cfg.rng)
    return _finish(mu, S, hyperplanes, "th:cox", cfg, [f"finite reflection group of order {verdict.order}"])


# --- dispatcher -----------------------------------------------------------------------------


def _dedupe(hyperplanes: Sequence[Hyperplane]) -> list:
    out: list = []
    for H in hyperplanes:
        if not any(
            (np.allclose(H.u, G.u, atol=1e-12) and abs(H.s - G.s) <= 1e-12)
            or (np.allclose(H.u, -G.u, atol=1e-12) and abs(H.s + G.s) <= 1e-12)
            for G in out
        ):
            out.append(H)
    return out


def _common_point(hyperplanes) -> Optional[np.ndarray]:
    U = np.array([H.u for H in hyperplanes])
    s = np.array([H.s for H in hyperplanes])
    xi, *_ = np.linalg.lstsq(U, s, rcond=None)
    if np.abs(U @ xi - s).max() <= 1e-12 * max(1.0, np.abs(s).max()):
        return xi
    return None


def _all_parallel(hyperplanes) -> bool:
    u = hyperplanes[0].u
    return all(abs(abs(float(H.u @ u)) - 1.0) <= 1e-12 for H in hyperplanes)


def _perp2(u) -> np.ndarray:
    return np.array([-u[1], u[0]])


def _decide_parallel(S, hyperplanes, cfg: Settings, is_sphere: bool) -> Decision:
    u = hyperplanes[0].u
    offsets = [H.s * float(np.sign(H.u @ u)) for H in hyperplanes]
    if is_sphere and len(offsets) in (2, 3):
        return decide_sphere_parallel(u, offsets, cfg)
    if is_isotropic(S, u):
        x = _fixed_line_point(S, u)
        if x is None:
            return Decision(Verdict.HUP, "cor:c(iii)", notes=["isotropic normal and E_u ∩ S is empty"])
        mu = line_product(x, u, offsets)
        return _finish(mu, S, hyperplanes, "cor:c(iii)", cfg, ["atoms on a line x + R u inside S"])
    if len(offsets) == 3 and _is_diagonal_form(S):
        return decide_parallel_family(S, u, offsets, cfg)
    mu = _chord_certificate(S, u, offsets, cfg)
    if mu is not None:
        return _finish(mu, S, hyperplanes, "chord-pair", cfg, ["two atoms on a chord along u"])
    return _decide_by_subfamilies(S, hyperplanes, cfg, is_sphere)


def _decide_concurrent(S, hyperplanes, cfg: Settings, is_sphere: bool) -> Decision:
    N, d = len(hyperplanes), S.d
    if N == 2 and d == 2:
        u1, u2 = (H.u for H in hyperplanes)
        return decide_2d(S, _perp2(u1), _perp2(u2), cfg.maxden, cfg.angle_tol, cfg.points_per_axis, cfg.half_extent)
    if is_sphere and N >= 3:
        return decide_sphere_concurrent(hyperplanes, cfg)
    iso = [is_isotropic(S, H.u) for H in hyperplanes]
    if all(iso) and _is_diagonal_form(S):
        return decide_isotropic_family(S, [H.u for H in hyperplanes], cfg)
    if N == 2 and not any(iso):
        return decide_two_intersecting(S, *hyperplanes, cfg)
    return _decide_by_subfamilies(S, hyperplanes, cfg, is_sphere)


def _decide_frame(S, hyperplanes, cfg: Settings, is_sphere: bool) -> Decision:
    if len(hyperplanes) == 1:
        return decide_single(S, hyperplanes[0], cfg)
    if _all_parallel(hyperplanes):
        return _decide_parallel(S, hyperplanes, cfg, is_sphere)
    xi0 = _common_point(hyperplanes)
    if xi0 is None:
        return _decide_by_subfamilies(S, hyperplanes, cfg, is_sphere)
    through0 = [Hyperplane(H.u, 0.0) for H in hyperplanes]
    D = _decide_concurrent(S, through0, cfg, is_sphere)
    if D.certificate is not None and np.any(xi0):
        mu = D.certificate.modulated(-xi0)
        return _finish(mu, S, hyperplanes, D.rule, cfg, [*D.notes, "translated to the common point"])
    return D


def _decide_by_subfamilies(S, hyperplanes, cfg: Settings, is_sphere: bool) -> Decision:
    """Monotonicity: a HUP subfamily decides the whole family; a subfamily certificate may annihilate all."""
    N = len(hyperplanes)
    certificates = []
    tried = 0
    for size in range(1, min(N, 4)):
        for idx in itertools.combinations(range(N), size):
            tried += 1
            if tried > SUBFAMILY_LIMIT:
                break
            D = _decide_frame(S, [hyperplanes[i] for i in idx], cfg, is_sphere)
            if D.verdict is Verdict.HUP:
                notes = [f"subfamily {list(idx)} is already HUP", *D.notes]
                return Decision(Verdict.HUP, D.rule, notes=notes, maxden=D.maxden)
            if D.certificate is not None:
                certificates.append((idx, D))
    for idx, D in certificates:
        if certificate_is_sound(D.certificate, S, hyperplanes, cfg):
            return Decision(Verdict.NOT_HUP, D.rule, D.certificate, [*D.notes, f"certificate of subfamily {list(idx)}"])
    return Decision(Verdict.UNDECIDED, "unresolved", notes=["no rule applies and no subfamily settles the family"])


def decide(
    S: QuadricSurface,
    hyperplanes: Sequence[Hyperplane],
    maxden: int = MAXDEN,
    angle_tol: float = ANGLE_TOL,
    tol: float = 1e-10,
    points_per_axis: int = 64,
    half_extent: float = 20.0,
    seed: int = 0,
) -> Decision:
    """Decide whether ``(S, union of hyperplanes)`` is a uniqueness pair, with a certificate when it is not."""
    hyperplanes = _dedupe(list(hyperplanes))
    if not hyperplanes:
        raise ValueError("at least one hyperplane is required")
    if any(H.d != S.d for H in hyperplanes):
        raise ValueError("hyperplane and surface dimensions differ")
    cfg = Settings(maxden, angle_tol, tol, points_per_axis, half_extent, np.random.default_rng(seed))
    if _is_empty(S):
        return Decision(Verdict.HUP, "empty", notes=["the surface has no real points"])
    nf = full_rank_normal_form(S)
    if nf is None:
        return _decide_frame(S, hyperplanes, cfg, False)
    canon = [nf.transport_hyperplane(H) for H in hyperplanes]
    D = _decide_frame(nf.surface, canon, cfg, nf.q == 0 and nf.level == 1.0)
    if D.certificate is None:
        return D
    mu = AtomicMeasure(nf.inverse(D.certificate.atoms), D.certificate.weights)
    return _finish(mu, S, hyperplanes, D.rule, cfg, D.notes)
