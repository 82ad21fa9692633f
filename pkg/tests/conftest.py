import numpy as np
import pytest

from robin_spectra.mesh import generate_disk_mesh, generate_ellipse_mesh, generate_rect_mesh
from robin_spectra.model import Potential, ProblemSpec
from robin_spectra.solver import solve_first_eigenpair

_CACHE = {}


def cached(key, build):
    if key not in _CACHE:
        _CACHE[key] = build()
    return _CACHE[key]


def disk(h=0.1, R=1.0):
    return cached(("disk", h, R), lambda: generate_disk_mesh(R, h))


def ellipse(h=0.1, a=2.0, b=1.0):
    return cached(("ellipse", h, a, b), lambda: generate_ellipse_mesh(a, b, h))


def rect(h=0.1, w=2.0, ht=1.0):
    return cached(("rect", h, w, ht), lambda: generate_rect_mesh(w, ht, h))


def spec_on(mesh, p=2.0, beta=1.0, V=None):
    V = Potential.constant(0.0) if V is None else V
    return ProblemSpec(p, beta, V).on(mesh)


def solved(mesh, p=2.0, beta=1.0, V=None, key=None):
    spec = spec_on(mesh, p, beta, V)
    k = ("solve", id(mesh), p, beta, repr(spec.potential.to_dict()), key)
    return spec, cached(k, lambda: solve_first_eigenpair(spec, mesh))


X1SQ = Potential.expression("x1**2")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = {}


def record_criterion(number: int, title: str, passed: bool, detail: str) -> str:
    line = f"criterion {number} [{'PASS' if passed else 'FAIL'}] {title}: {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
