import json
from importlib import resources

import numpy as np
import pytest
from jsonschema import Draft202012Validator
from referencing import Registry, Resource

from hupcert.quadrics import Hyperplane, QuadricSurface


def random_surface(rng: np.random.Generator, d: int, kind: str = "any") -> QuadricSurface:
    """Random symmetric quadric; ``kind`` picks a definite, indefinite or arbitrary quadratic part."""
    M = rng.normal(size=(d, d))
    if kind == "definite":
        B = M @ M.T + d * np.eye(d)
    elif kind == "indefinite":
        lam = np.concatenate([rng.uniform(0.5, 2, d - 1), [-rng.uniform(0.5, 2)]])
        Qm, _ = np.linalg.qr(M)
        B = Qm @ np.diag(lam) @ Qm.T
    else:
        B = (M + M.T) / 2
    return QuadricSurface(B, rng.normal(size=d), float(rng.uniform(0.5, 3)))


def unit(v) -> np.ndarray:
    v = np.asarray(v, float)
    return v / np.linalg.norm(v)


def planes(*normals, offsets=None):
    offsets = offsets or [0.0] * len(normals)
    return [Hyperplane(unit(u), s) for u, s in zip(normals, offsets)]


@pytest.fixture
def rng():
    return np.random.default_rng(20261014)


@pytest.fixture(scope="session")
def schemas():
    root = resources.files("hupcert") / "schemas"
    loaded = {p.name: json.loads(p.read_text()) for p in root.iterdir() if p.name.endswith(".json")}
    registry = Registry().with_resources((name, Resource.from_contents(s)) for name, s in loaded.items())
    return {name[:-5]: Draft202012Validator(s, registry=registry) for name, s in loaded.items()}


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
