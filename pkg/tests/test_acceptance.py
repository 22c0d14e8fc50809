"""Acceptance gate: one PASS/FAIL line per criterion, repeated in the pytest terminal summary."""

import functools
import math
import time

import numpy as np
import pytest

from hupcert.coxeter import AngleWitness, Finite, Infinite, ReflectionSet, is_infinite
from hupcert.counterexamples import antipodal_pair, orbit_antisymmetrization, sphere_lattice, two_point
from hupcert.cramer_wold import Ambiguous, Reconstructed, forward, reconstruct
from hupcert.decision import Verdict
from hupcert.hup_decide import decide, decide_isotropic_family, decide_sphere_concurrent, decide_sphere_parallel
from hupcert.measures import (
    AtomicMeasure,
    GridSpec,
    apply_PD,
    char_fn,
    check_fund_equivalences,
    measure_distance,
    project_to_hyperplane,
    verify_vanishing,
)
from hupcert.quadrics import Hyperplane, QuadricSurface, eval_p, sample_surface_point, scale
from hupcert.reflections import QReflection, is_isotropic

from conftest import random_surface, unit
from invariance import CASES, random_affine, reframe

RESULTS: list[str] = []

PHI = (1 + math.sqrt(5)) / 2
B3 = [[1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, 0], [1, -1, 0], [1, 0, 1], [1, 0, -1], [0, 1, 1], [0, 1, -1]]
H3 = [[1, 0, 0], [0, 1, 0], [0, 0, 1], [PHI, 1 / PHI, 1]]


def criterion(number: int, title: str):
    def wrap(fn):
        @functools.wraps(fn)
        def run(*args, **kwargs):
            start = time.perf_counter()
            try:
                detail = fn(*args, **kwargs)
            except BaseException as exc:
                line = f"FAIL criterion {number} ({title}): {type(exc).__name__}: {str(exc).splitlines()[0] if str(exc) else ''}"
                RESULTS.append(line)
                print(line)
                raise
            line = f"PASS criterion {number} ({title}) [{time.perf_counter() - start:.2f}s]" + (f": {detail}" if detail else "")
            RESULTS.append(line)
            print(line)

        return run

    return wrap


def planes(normals, offsets=None):
    offsets = offsets or [0.0] * len(normals)
    return [Hyperplane(unit(u), s) for u, s in zip(normals, offsets)]


def fund_loop(S: QuadricSurface, mu: AtomicMeasure, hyperplanes, grid: int = 64, extent: float = 20.0) -> dict:
    """Both certificate identities plus the grid check on every hyperplane; raises on failure."""
    worst = {"pushforward": 0.0, "frequency": 0.0, "grid": 0.0}
    tv = mu.total_variation
    assert len(mu) > 0 and tv > 0
    for H in hyperplanes:
        if is_isotropic(S, H.u):
            # no reflection: the transform on H_u is the push-forward along u, which must vanish
            dev = project_to_hyperplane(mu, H).total_variation / tv
            worst["pushforward"] = max(worst["pushforward"], dev)
        else:
            rep = check_fund_equivalences(S, mu, H)
            worst["pushforward"] = max(worst["pushforward"], rep.pushforward_deviation)
            worst["frequency"] = max(worst["frequency"], rep.frequency_deviation)
        v = verify_vanishing(mu, H, GridSpec.on_hyperplane(H, grid, extent), 1e-10)
        worst["grid"] = max(worst["grid"], v.max_abs / tv)
    assert worst["pushforward"] < 1e-10, worst
    assert worst["frequency"] < 1e-10, worst
    assert worst["grid"] < 1e-10, worst
    return worst


@criterion(1, "reflection algebra")
def test_criterion_1_reflection_algebra():
    rng = np.random.default_rng(1)
    checked = 0
    worst = [0.0, 0.0, 0.0]
    misses = []
    while checked < 1000:
        d = int(rng.integers(2, 7))
        S = random_surface(rng, d)
        u = unit(rng.normal(size=d))
        if is_isotropic(S, u):
            continue
        R = QReflection(S, u)
        x = rng.normal(size=d) * rng.uniform(0.1, 10)
        y = R(x)
        inv = np.linalg.norm(R(y) - x) / (1 + np.linalg.norm(x))
        level = abs(eval_p(S, y) - eval_p(S, x)) / max(1.0, scale(S, x))
        w = y - x
        proj = np.linalg.norm(w - (w @ u) * u)
        worst = [max(worst[0], inv), max(worst[1], level), max(worst[2], proj)]
        if not (inv < 1e-10 and level < 1e-9 and proj < 1e-12):
            misses.append(f"#{checked} |Q(u)|/|B|={abs(S.Q(u)) / S.norm_B:.1e} inv={inv:.1e} level={level:.1e} proj={proj:.1e}")
        checked += 1
    assert not misses, f"{len(misses)}/1000 samples out of tolerance: " + "; ".join(misses)
    return f"involution {worst[0]:.1e}, level {worst[1]:.1e}, projection {worst[2]:.1e}"


@criterion(2, "certificate identities and grid vanishing")
def test_criterion_2_certificate_loop():
    rng = np.random.default_rng(2)
    report = {}
    # two_point on random ellipsoids and hyperboloids
    for kind in ("definite", "indefinite"):
        for _ in range(5):
            S = random_surface(rng, 3, kind)
            H = Hyperplane(unit(rng.normal(size=3)), float(rng.uniform(-2, 2)))
            report["two_point"] = fund_loop(S, two_point(S, H, rng=rng), [H])
    sphere = QuadricSurface.sphere(3)
    for s, k in [(2.0, 1), (4.0, 2), (7.0, 3)]:
        u = unit(rng.normal(size=3))
        report["sphere_lattice"] = fund_loop(sphere, sphere_lattice(u, s, 3, k), planes([u, u], [-s, s]))
    for normals in (B3, H3):
        G = is_infinite(ReflectionSet(normals))
        report["orbit_antisymmetrization"] = fund_loop(sphere, orbit_antisymmetrization(G, rng=rng), planes(normals))
    cone = QuadricSurface.diagonal(2, 2, 0.0)
    u = unit([1, 0, 1, 0])
    report["antipodal_pair"] = fund_loop(cone, antipodal_pair(cone, u, [u]), planes([u]))
    return ", ".join(f"{k} grid {v['grid']:.1e}" for k, v in report.items())


@criterion(3, "circle catalogue")
def test_criterion_3_circle_catalogue():
    circle = QuadricSurface.sphere(2)
    count = 0
    for q in range(2, 13):
        for p in range(1, q):
            if math.gcd(p, q) != 1:
                continue
            t = math.pi * p / q
            hs = planes([[1, 0], [math.cos(t), math.sin(t)]])
            D = decide(circle, hs)
            assert D.verdict is Verdict.NOT_HUP and D.rule == "th:dim2(iii)", (p, q, D.notes)
            assert len(D.certificate) == 2 * q, (p, q, len(D.certificate))
            fund_loop(circle, D.certificate, hs)
            count += 1
    for t in (1.0, math.sqrt(2), (math.pi**2 / 10) % math.pi):
        D = decide(circle, planes([[1, 0], [math.cos(t), math.sin(t)]]), maxden=10**6)
        assert D.verdict is Verdict.HUP and D.maxden == 10**6, (t, D)
    return f"{count} rational angles NOT_HUP, 3 irrational HUP"


def lattice_oracle(s: float) -> bool:
    """Some height h in (0, 1] with cos(s h) = 0 or sin(s h) = 0, found by a sign-change scan."""
    h = np.linspace(1e-9, 1.0, 200001)
    for f in (np.cos(s * h), np.sin(s * h)):
        if np.any(np.sign(f[1:]) != np.sign(f[:-1])) or np.any(np.abs(f) < 1e-12):
            return True
    return False


@criterion(4, "sphere parallel planes")
def test_criterion_4_sphere_parallel():
    u = unit([1, 2, 3])
    sphere = QuadricSurface.sphere(3)
    D = decide_sphere_parallel(u, [-2.0, 2.0])
    assert D.verdict is Verdict.NOT_HUP
    fund_loop(sphere, D.certificate, planes([u, u], [-2.0, 2.0]))
    assert any("threshold discrepancy" in n for n in D.notes)
    assert decide_sphere_parallel(u, [-0.5, 0.5]).verdict is Verdict.HUP
    scan = [round(0.3 * k, 10) for k in range(1, 11)]
    hup = {s: decide_sphere_parallel(u, [-s, s]).verdict is Verdict.HUP for s in scan}
    for s in scan:
        assert hup[s] == (not lattice_oracle(s)), s
    last_hup = max(s for s in scan if hup[s])
    first_not = min(s for s in scan if not hup[s])
    assert last_hup < math.pi / 2 <= first_not
    assert all(hup[s] for s in scan if s < last_hup) and not any(hup[s] for s in scan if s > first_not)
    return f"threshold between s={last_hup} and s={first_not}, pi/2 = {math.pi / 2:.4f}"


@criterion(5, "Coxeter finiteness")
def test_criterion_5_coxeter():
    for q in range(2, 13):
        G = is_infinite(ReflectionSet([[1, 0], [math.cos(math.pi / q), math.sin(math.pi / q)]]))
        assert isinstance(G, Finite) and G.order == 2 * q, q
    for normals, order in ((B3, 48), (H3, 120)):
        G = is_infinite(ReflectionSet(normals))
        assert isinstance(G, Finite) and G.order == order
        D = decide_sphere_concurrent(planes(normals))
        assert D.verdict is Verdict.NOT_HUP and D.rule == "th:cox"
        fund_loop(QuadricSurface.sphere(3), D.certificate, planes(normals))
    G = is_infinite(ReflectionSet([[1, 0, 0], [math.cos(1), math.sin(1), 0], [0, 0, 1]]))
    assert isinstance(G, Infinite) and isinstance(G.witness, AngleWitness)
    D = decide_sphere_concurrent(planes([[1, 0, 0], [math.cos(1), math.sin(1), 0], [0, 0, 1]]))
    assert D.verdict is Verdict.HUP
    return "dihedral 2q for q<=12, B3 48, H3 120, irrational pair infinite"


def isotropic_constructions(p: int, q: int):
    """The three normal families built from an orthonormal basis of R^p, embedded in R^q."""
    d = p + q
    u, ut = [], []
    for j in range(p):
        a = np.zeros(d)
        a[j], a[p + j] = 1, 1
        b = a.copy()
        b[p + j] = -1
        u.append(a)
        ut.append(b)
    extra = []
    for j in range(p, q):
        c = np.zeros(d)
        c[0], c[p + j] = 1, 1
        extra.append(c)
    return {
        "rho>0, p normals": (1.0, u),
        "rho=0, 2p normals": (0.0, u + ut),
        "rho<0, p+q normals": (-1.0, u + ut + extra),
    }


@criterion(6, "isotropic families")
def test_criterion_6_isotropic():
    for p, q in [(1, 2), (2, 2), (2, 3), (1, 3), (3, 3)]:
        for name, (rho, normals) in isotropic_constructions(p, q).items():
            S = QuadricSurface.diagonal(p, q, rho)
            D = decide(S, planes(normals))
            assert D.verdict is Verdict.HUP, (p, q, name, D.notes)
    # k < p: every such family is claimed to fail uniqueness
    e = np.eye(6)
    fewer = {
        "p=2, rho=1, k=1": (2, 2, 1.0, [e[0] + e[2]]),
        "p=2, rho=0, k=1": (2, 2, 0.0, [e[0] + e[2]]),
        "p=3, rho=-1, k=2, Q-orthogonal": (3, 3, -1.0, [e[0] + e[3], e[1] + e[4]]),
        "p=3, rho=1, k=2, not Q-orthogonal": (3, 3, 1.0, [e[0] + e[3], e[0] + e[4]]),
    }
    failures = []
    for name, (p, q, rho, normals) in fewer.items():
        S = QuadricSurface.diagonal(p, q, rho)
        U = [unit(n[: p + q]) for n in normals]
        D = decide_isotropic_family(S, U) if len(U) > 1 else decide(S, planes(U))
        if D.verdict is not Verdict.NOT_HUP:
            failures.append(f"{name}: {D.verdict.value} ({D.rule}; {D.notes[0] if D.notes else ''})")
            continue
        fund_loop(S, D.certificate, planes(U), grid=24 if p + q > 4 else 64)
    assert not failures, "; ".join(failures)


@criterion(7, "Cramer-Wold round trip")
def test_criterion_7_cramer_wold():
    rng = np.random.default_rng(7)
    surfaces = [
        QuadricSurface.sphere(3),
        QuadricSurface(np.diag([1.0, 1.0, 0.0]), [0, 0, -0.5], 0),
        QuadricSurface.diagonal(2, 1, 1.0),
    ]
    worst_err, worst_time, done = 0.0, 0.0, 0
    while done < 100:
        S = surfaces[done % 3]
        H1, H2 = (Hyperplane(unit(rng.normal(size=3))) for _ in range(2))
        if is_isotropic(S, H1.u, 1e-3) or is_isotropic(S, H2.u, 1e-3):
            continue
        if decide(S, [H1, H2], maxden=100).verdict is not Verdict.HUP:
            continue
        n = int(rng.integers(1, 11))
        pts = np.array([sample_surface_point(S, rng) for _ in range(n)])
        mu = AtomicMeasure(pts, rng.normal(size=n) + 1j * rng.normal(size=n))
        start = time.perf_counter()
        res = reconstruct(S, H1, H2, *forward(mu, H1, H2))
        elapsed = time.perf_counter() - start
        assert isinstance(res, Reconstructed), res
        err = measure_distance(res.measure, mu)
        assert err < 1e-8 and elapsed < 1.0, (err, elapsed)
        worst_err, worst_time = max(worst_err, err), max(worst_time, elapsed)
        done += 1
    # engineered ambiguity: half of a D4 orbit on the equator
    S = QuadricSurface.sphere(3)
    H1, H2 = Hyperplane([1.0, 0, 0]), Hyperplane(unit([1, 1, 0]))
    ang = 0.3 + np.arange(4) * math.pi / 2
    half = AtomicMeasure(np.column_stack([np.cos(ang), np.sin(ang), np.zeros(4)]))
    res = reconstruct(S, H1, H2, *forward(half, H1, H2))
    assert isinstance(res, Ambiguous)
    k = res.kernel
    for H in (H1, H2):
        v = verify_vanishing(k, H, GridSpec.on_hyperplane(H), 1e-9)
        assert v.passed, v.max_abs
    return f"100 recoveries, max error {worst_err:.1e}, max time {worst_time * 1e3:.1f} ms; ambiguous kernel verified"


@criterion(8, "PDE identity")
def test_criterion_8_pde():
    rng = np.random.default_rng(8)
    worst = 0.0
    for _ in range(100):
        d = int(rng.integers(2, 5))
        S = random_surface(rng, d, "definite" if rng.random() < 0.5 else "indefinite")
        n = int(rng.integers(1, 8))
        pts = np.array([sample_surface_point(S, rng) for _ in range(n)])
        mu = AtomicMeasure(pts, rng.normal(size=n) + 1j * rng.normal(size=n))
        xi = rng.normal(size=(100, d)) * 5
        sc = max(1.0, float(np.max(scale(S, pts))))
        val = np.abs(apply_PD(S, mu, xi)).max() / (mu.total_variation * sc)
        worst = max(worst, val)
        assert val < 1e-10, val
    # eigenfunctions of the Laplacian: e_lambda = e_mu on one plane, |lambda| = |mu|
    rho = -4.0
    S = QuadricSurface.sphere(3, math.sqrt(-rho))
    lam = np.array([1.2, -0.7, math.sqrt(-rho - 1.2**2 - 0.7**2)])
    other = lam * [1, 1, -1]
    nu = AtomicMeasure(np.vstack([lam, other]), [1.0, -1.0])
    assert np.abs(apply_PD(S, nu, rng.normal(size=(50, 3)))).max() < 1e-12
    H = Hyperplane([0, 0, 1.0])
    H2 = Hyperplane(unit([1, 0.4, 0.9]))
    assert verify_vanishing(nu, H).passed
    assert not verify_vanishing(nu, H2).passed
    assert decide(S, [H, H2]).verdict is Verdict.HUP
    return f"max |P(D) mu^| / (TV scale) = {worst:.1e}"


@criterion(9, "affine invariance")
def test_criterion_9_invariance():
    rng = np.random.default_rng(9)
    names = sorted(CASES)
    base = {name: decide(*CASES[name][:2]).verdict for name in names}
    for i in range(100):
        name = names[i % len(names)]
        S, hs, _ = CASES[name]
        A, b = random_affine(rng, S.d)
        T, ks = reframe(S, hs, A, b)
        D = decide(T, ks, seed=i)
        assert D.verdict is base[name], (name, i, D.notes)
    return "100 re-framings, verdicts unchanged"


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-s"]))
