"""Fast numerical invariant suite behind ``pulseopt check``.

Each check prints one ``PASS``/``FAIL`` line with the measured quantity.
The whole suite runs in a few seconds.
"""

from __future__ import annotations

import math
import tempfile
from pathlib import Path

import numpy as np

from .gradient_flow import FilterFunction, constrained_update_direction
from .msde import SearchSpace, run_msde
from .objectives import ShaperProblem, evaluate_tpa, negative_sphere, rb_transfer_problem
from .quantum import propagate
from .tables import read_table, write_table
from .units import UNITS

__all__ = ["run_checks", "CHECKS"]


def _units(rng):
    k = rng.uniform(1.0, 3e4, 100)
    back = UNITS.angular_frequency_to_wavenumber(UNITS.wavenumber_to_angular_frequency(k))
    err = float(np.max(np.abs(back - k) / k))
    return err < 1e-14, f"wavenumber round trip rel. error {err:.2e}"


def _unitarity(rng):
    p = rb_transfer_problem(2, 200.0, n_time=2048)
    res = p.propagate(rng.normal(0.0, 1.0, p.base_field.grid.n_points))
    err = res.unitarity_error()
    norm = float(np.max(np.abs(res.populations.sum(axis=1) - 1.0)))
    return max(err, norm) < 1e-10, f"unitarity {err:.2e}, population sum {norm:.2e}"


def _field_free(rng):
    p = rb_transfer_problem(2, 200.0, n_time=512)
    psi0 = rng.normal(size=3) + 1j * rng.normal(size=3)
    psi0 /= np.linalg.norm(psi0)
    res = propagate(p.system, np.zeros(p.time_grid.n_points), p.time_grid, psi0)
    drift = float(np.max(np.abs(res.populations - res.populations[0])))
    return drift < 1e-12, f"field-free population drift {drift:.2e}"


def _phase_gradient(rng):
    p = rb_transfer_problem(2, 200.0, n_time=2048)
    n = p.base_field.grid.n_points
    phi = 0.5 * rng.normal(size=n)
    ev = p.evaluate(phi)
    w = p.base_field.grid.weights
    worst = 0.0
    for _ in range(3):
        v = rng.normal(size=n)
        h = 1e-4
        fd = (p.evaluate(phi + h * v, False).value - p.evaluate(phi - h * v, False).value) / (2 * h)
        an = float(np.sum(ev.gradient * w * v))
        worst = max(worst, abs(fd - an) / max(abs(an), 1e-12))
    return worst < 1e-5, f"directional phase derivative vs central difference, worst rel. error {worst:.2e}"


def _projection(rng):
    p = rb_transfer_problem(3, 200.0, n_time=2048)
    fld = p.field(0.3 * rng.normal(size=p.base_field.grid.n_points))
    grad = rng.normal(size=fld.grid.n_points)
    _, info = constrained_update_direction(grad, p.constraints(), FilterFunction.from_wavenumber(50.0),
                                           fld, return_info=True)
    orth = max(info.orthogonality)
    ok = orth < 1e-8 and abs(info.ascent - 1.0) < 1e-8
    return ok, f"constraint orthogonality {orth:.2e}, ascent {info.ascent:.12f}"


def _msde_determinism(rng):
    seed = int(rng.integers(0, 2 ** 31))
    space = SearchSpace.box(5, -5.0, 5.0)
    a = run_msde(negative_sphere, space, 10, 20, seed, vectorized=True)
    b = run_msde(negative_sphere, space, 10, 20, seed, vectorized=True)
    same = np.array_equal(a.best_trace(), b.best_trace()) and np.array_equal(a.best_vector, b.best_vector)
    mono = bool(np.all(np.diff(a.best_trace()) >= 0))
    return same and mono, f"seed {seed}: identical traces {same}, monotone best {mono}"


def _tpa_flat(rng):
    p = ShaperProblem()
    X = rng.uniform(0.0, 2 * math.pi, (200, p.n_groups))
    worst = float(np.max(evaluate_tpa(p, X))) / p.flat_tpa
    return worst <= 1.0, f"max random TPA / flat TPA = {worst:.6f}"


def _csv_roundtrip(rng):
    x = rng.normal(size=7) * 10.0 ** rng.integers(-20, 20, 7)
    with tempfile.TemporaryDirectory() as d:
        back = read_table(write_table(Path(d) / "t.csv", {"x_au": x}))["x_au"]
    err = float(np.max(np.abs(back - x) / np.abs(x)))
    return err < 1e-12, f"CSV round trip rel. error {err:.2e}"


CHECKS = {
    "units": _units,
    "unitarity": _unitarity,
    "field-free": _field_free,
    "phase-gradient": _phase_gradient,
    "projection": _projection,
    "msde-determinism": _msde_determinism,
    "tpa-flat-optimum": _tpa_flat,
    "csv-roundtrip": _csv_roundtrip,
}


def run_checks(seed: int = 0, out=print) -> bool:
    """Run every check; returns True if all pass."""
    rng = np.random.default_rng(seed)
    ok_all = True
    for name, fn in CHECKS.items():
        try:
            ok, detail = fn(rng)
        except Exception as exc:  # noqa: BLE001 - report and continue
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        ok_all &= bool(ok)
        out(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    return ok_all
