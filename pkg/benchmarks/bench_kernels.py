"""Wall-clock comparison of the numba and numpy kernel backends.

Run with ``python benchmarks/bench_kernels.py [--points N] [--repeat R]``.
The backend is switched through ``CMCFOL_BACKEND`` between runs; the
first numba call (compilation) is excluded from the timings.
"""
from __future__ import annotations

import argparse
import os
import time

import numpy as np

from cmcfol._accel import HAVE_NUMBA
from cmcfol.kernels import atom_jets, curvature_from_jets
from cmcfol.metric import builtin_model


def _best(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def run(points: int, repeat: int, model_name: str = "perturbed"):
    model = builtin_model(model_name)
    rng = np.random.default_rng(0)
    d = rng.standard_normal((points, 3))
    pts = d / np.linalg.norm(d, axis=1)[:, None] * rng.uniform(model.r_min + 1.0, 50.0, points)[:, None]
    arrays = model._arrays
    rows = {}
    ref = None
    for name in ("numpy", "numba"):
        if name == "numba" and not HAVE_NUMBA:
            continue
        os.environ["CMCFOL_BACKEND"] = name
        jets = atom_jets(pts, *arrays)  # warm-up / compile
        curv = curvature_from_jets(*jets)
        t_jets = _best(lambda: atom_jets(pts, *arrays), repeat)
        t_curv = _best(lambda: curvature_from_jets(*jets), repeat)
        if ref is None:
            ref = (jets, curv)
            err = 0.0
        else:
            err = max(np.abs(a - b).max() for a, b in zip(ref[1][1:], curv[1:]) if a is not None)
        rows[name] = (t_jets, t_curv, err)
    os.environ.pop("CMCFOL_BACKEND", None)
    return rows


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--points", type=int, default=20000)
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--model", default="perturbed")
    args = p.parse_args(argv)
    rows = run(args.points, args.repeat, args.model)
    print(f"{args.points} points, model {args.model}, best of {args.repeat}")
    print(f"{'backend':8s} {'atom_jets [ms]':>15s} {'curvature [ms]':>15s} {'max |diff|':>12s}")
    for name, (tj, tc, err) in rows.items():
        print(f"{name:8s} {1e3 * tj:15.2f} {1e3 * tc:15.2f} {err:12.2e}")
    if "numba" in rows:
        tj0, tc0, _ = rows["numpy"]
        tj1, tc1, _ = rows["numba"]
        print(f"speedup  {tj0 / tj1:15.1f} {tc0 / tc1:15.1f}")


if __name__ == "__main__":
    main()
