"""``hupcert`` command line: JSON in, JSON out."""

from __future__ import annotations

import argparse
import json
import math
import sys
from typing import Any, Optional

import numpy as np

from . import cramer_wold
from .counterexamples import CertificateError, antipodal_pair, orbit_antisymmetrization, two_point
from .coxeter import Finite, ReflectionSet, is_infinite
from .decision import Verdict
from .hup_decide import (
    Settings,
    certificate_is_sound,
    decide,
    decide_isotropic_family,
    decide_sphere_parallel,
)
from .measures import AtomicMeasure, GridSpec, verify_vanishing
from .quadrics import (
    Hyperplane,
    QuadricSurface,
    classify_conic,
    classify_surface,
    decompose_direction,
    discriminant,
    fiber_conic,
    full_rank_normal_form,
    sample_surface_point,
)
from .reflections import QReflection, intersect_Eu_family, is_isotropic

EXIT_MALFORMED = 2
EXIT_PRECONDITION = 3
EXIT_UNDECIDED = 4


class Malformed(Exception):
    pass


def dumps(obj: Any) -> str:
    """JSON with every float written to 17 significant digits."""
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {dumps(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(dumps(v) for v in obj) + "]"
    if isinstance(obj, np.ndarray):
        return dumps(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            raise ValueError("non-finite number in output")
        if x == int(x) and abs(x) < 1e16:
            return str(int(x)) if x != 0 or math.copysign(1, x) > 0 else "0"
        return format(x, ".17g")
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


# --- input --------------------------------------------------------------------------------


def _load_json(text: str, what: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise Malformed(f"{what}: {exc}") from exc


def _read_file(path: str, what: str):
    with open(path, encoding="utf-8") as fh:
        return _load_json(fh.read(), what)


def _gather(args) -> dict:
    data: dict = {}
    if args.input:
        loaded = _read_file(args.input, "input") if args.input != "-" else _load_json(sys.stdin.read(), "stdin")
        if not isinstance(loaded, dict):
            raise Malformed("input must be a JSON object")
        data.update(loaded)
    for key in ("surface", "hyperplanes", "measure"):
        path = getattr(args, key)
        if path:
            data[key] = _read_file(path, key)
    return data


def _need(data: dict, key: str):
    if key not in data:
        raise ValueError(f"missing input: {key}")
    return data[key]


def _surface(data) -> QuadricSurface:
    return QuadricSurface.from_dict(_need(data, "surface"))


def _hyperplanes(data) -> list[Hyperplane]:
    raw = _need(data, "hyperplanes")
    if isinstance(raw, dict):
        raw = raw.get("hyperplanes", raw.get("normals"))
    if not isinstance(raw, list) or not raw:
        raise ValueError("hyperplanes must be a nonempty list")
    out = []
    for h in raw:
        out.append(Hyperplane.from_dict(h) if isinstance(h, dict) else Hyperplane(h))
    return out


def _measure(raw, d: Optional[int] = None) -> AtomicMeasure:
    if not isinstance(raw, dict):
        raise ValueError("measure must be an object with atoms and weights")
    return AtomicMeasure.from_dict(raw, d)


def _settings(args) -> Settings:
    return Settings(
        maxden=args.maxden,
        tol=args.tol,
        points_per_axis=args.grid,
        half_extent=args.extent,
        rng=np.random.default_rng(args.seed),
    )


# --- commands -----------------------------------------------------------------------------


def cmd_classify(args, data) -> dict:
    S = _surface(data)
    out: dict = dict(classify_surface(S))
    if "hyperplanes" in data:
        hs = _hyperplanes(data)
        if len(hs) != 2:
            raise ValueError("fiber classification needs two hyperplanes")
        theta, v2 = decompose_direction(hs[0].u, hs[1].u)
        x = sample_surface_point(S, np.random.default_rng(args.seed))
        f = fiber_conic(S, x, hs[0].u, v2)
        out["fiber"] = {
            "class": classify_conic(f).value,
            "discriminant": discriminant(S, hs[0].u, v2),
            "theta": theta,
            "base_point": x,
        }
    return out


def cmd_decide(args, data) -> dict:
    D = decide(
        _surface(data),
        _hyperplanes(data),
        maxden=args.maxden,
        tol=args.tol,
        points_per_axis=args.grid,
        half_extent=args.extent,
        seed=args.seed,
    )
    return D.to_dict()


def cmd_counterexample(args, data) -> dict:
    cfg = _settings(args)
    kind = args.kind
    if kind == "orbit":
        rs = ReflectionSet([H.u for H in _hyperplanes(data)])
        G = is_infinite(rs, maxden=args.maxden)
        if not isinstance(G, Finite):
            raise ValueError("the reflection group is not finite")
        mu = orbit_antisymmetrization(G, rng=cfg.rng)
        S = QuadricSurface.sphere(rs.d)
        return _checked(mu, S, [Hyperplane(u) for u in rs.normals], cfg)
    hs = _hyperplanes(data)
    if kind == "sphere-lattice":
        D = decide_sphere_parallel(hs[0].u, [H.s * float(np.sign(H.u @ hs[0].u)) for H in hs], cfg)
    elif kind == "antipodal":
        S = _surface(data)
        witness = data.get("witness")
        if witness is None:
            res = intersect_Eu_family(S, [H.u for H in hs])
            if res.witness is None:
                raise ValueError("the sets E_u meet only in the origin or not at all")
            witness = res.witness
        return _checked(antipodal_pair(S, witness, [H.u for H in hs]), S, hs, cfg)
    elif kind == "box":
        D = decide_isotropic_family(_surface(data), [H.u for H in hs], cfg)
    elif kind == "two-point":
        S = _surface(data)
        if len(hs) != 1:
            raise ValueError("two-point construction takes one hyperplane")
        return _checked(two_point(S, hs[0], rng=cfg.rng), S, hs, cfg)
    else:
        S = _surface(data)
        D = decide(S, hs, args.maxden, tol=args.tol, points_per_axis=args.grid, half_extent=args.extent, seed=args.seed)
    if D.certificate is None:
        raise ValueError(f"no certificate: verdict {D.verdict.value} ({D.rule})")
    return D.certificate.to_dict()


def _checked(mu: AtomicMeasure, S, hs, cfg: Settings) -> dict:
    if not certificate_is_sound(mu, S, hs, cfg):
        raise CertificateError("constructed measure failed verification")
    return mu.to_dict()


def cmd_verify(args, data) -> dict:
    hs = _hyperplanes(data)
    mu = _measure(_need(data, "measure"), hs[0].d)
    reports = []
    axis = _settings(args).grid_axis(hs[0].d)
    for H in hs:
        grid = GridSpec.on_hyperplane(H, axis, args.extent)
        reports.append(verify_vanishing(mu, H, grid, args.tol).to_dict())
    return {
        "max_abs": max(r["max_abs"] for r in reports),
        "pass": all(r["pass"] for r in reports),
        "reports": reports,
    }


def cmd_coxeter(args, data) -> dict:
    raw = data.get("normals")
    normals = raw if raw is not None else [H.u for H in _hyperplanes(data)]
    return is_infinite(ReflectionSet(normals), maxden=args.maxden).to_dict()


def cmd_reconstruct(args, data) -> dict:
    S = _surface(data)
    hs = _hyperplanes(data)
    if len(hs) != 2:
        raise ValueError("reconstruction takes exactly two hyperplanes")
    projections = _need(data, "projections")
    if not isinstance(projections, list) or len(projections) != 2:
        raise ValueError("projections must be a list of two measures")
    p1, p2 = (_measure(p, S.d - 1) for p in projections)
    return cramer_wold.reconstruct(S, hs[0], hs[1], p1, p2, data.get("tol", cramer_wold.MATCH_TOL)).to_dict()


def cmd_orbit(args, data) -> dict:
    S = _surface(data)
    hs = _hyperplanes(data)
    if len(hs) != 2:
        raise ValueError("the orbit alternates two reflections")
    if any(is_isotropic(S, H.u) for H in hs):
        raise ValueError("isotropic normal: no reflection")
    R = [QReflection(S, H.u) for H in hs]
    start = data.get("start")
    x = np.asarray(start, float) if start is not None else sample_surface_point(S, np.random.default_rng(args.seed))
    steps = int(data.get("steps", args.steps))
    pts = []
    for k in range(steps):
        x = R[k % 2](x)
        pts.append(x.copy())
    out: dict = {"points": pts}
    if S.d == 2 and classify_surface(S)["type"] == "ellipsoid":
        z = full_rank_normal_form(S).forward(np.array(pts))
        ang = np.sort(np.mod(np.arctan2(z[:, 1], z[:, 0]), 2 * math.pi))
        gaps = np.diff(np.concatenate([ang, [ang[0] + 2 * math.pi]]))
        out["max_angular_gap"] = float(gaps.max())
    return out


COMMANDS = {
    "classify": cmd_classify,
    "decide": cmd_decide,
    "counterexample": cmd_counterexample,
    "verify-vanishing": cmd_verify,
    "coxeter": cmd_coxeter,
    "reconstruct": cmd_reconstruct,
    "orbit": cmd_orbit,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hupcert", description=__doc__)
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--input", "-i", help="JSON object with any of the inputs ('-' for stdin)")
    parser.add_argument("--surface", help="JSON file with {B, v, rho}")
    parser.add_argument("--hyperplanes", help="JSON file with a list of {u, s}")
    parser.add_argument("--measure", help="JSON file with {atoms, weights}")
    parser.add_argument("--maxden", type=int, default=1_000_000)
    parser.add_argument("--tol", type=float, default=1e-10)
    parser.add_argument("--grid", type=int, default=64)
    parser.add_argument("--extent", type=float, default=20.0)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--steps", type=int, default=500)
    parser.add_argument(
        "--kind", default="auto", choices=["auto", "two-point", "antipodal", "box", "sphere-lattice", "orbit"]
    )
    parser.add_argument("--strict", action="store_true", help="exit 4 when the verdict is UNDECIDED")
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if not (args.input or args.surface or args.hyperplanes or args.measure) and not sys.stdin.isatty():
        args.input = "-"
    try:
        data = _gather(args)
        result = COMMANDS[args.command](args, data)
    except Malformed as exc:
        print(dumps({"error": "malformed JSON", "detail": str(exc)}), file=sys.stderr)
        return EXIT_MALFORMED
    except (ValueError, KeyError, TypeError, ArithmeticError, OSError) as exc:
        print(dumps({"error": "precondition", "detail": str(exc)}), file=sys.stderr)
        return EXIT_PRECONDITION
    sys.stdout.write(dumps(result) + "\n")
    if args.strict and result.get("verdict") == Verdict.UNDECIDED.value:
        return EXIT_UNDECIDED
    return 0


if __name__ == "__main__":
    sys.exit(main())
