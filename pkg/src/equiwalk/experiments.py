"""Scenario runners. Each scenario returns tables plus pass/fail checks.

Scenarios are registered with a parameter schema so configs can be validated
before anything runs. Sweep points are independent; ``pmap`` evaluates them on
a thread pool and returns results in sweep order, so output does not depend on
the thread count.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import crystal, lattice, oracles, spectral, sphere, torus
from .errors import ValidationError


@dataclass
class Check:
    name: str
    value: float
    threshold: float
    relation: str  # "<=", ">=", "<", ">"
    passed: bool = field(init=False)

    def __post_init__(self):
        v, t = float(self.value), float(self.threshold)
        self.passed = bool({"<=": v <= t, ">=": v >= t, "<": v < t, ">": v > t}[self.relation])

    def to_dict(self) -> dict:
        return {"name": self.name, "value": float(self.value), "threshold": float(self.threshold),
                "relation": self.relation, "pass": self.passed}


@dataclass
class Table:
    header: list
    rows: list


@dataclass
class ScenarioResult:
    scenario: str
    tables: dict
    checks: list
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


@dataclass(frozen=True)
class RateFit:
    x: tuple
    y: tuple
    slope: float
    intercept: float
    residual: float


def fit_rate(sweep, deviations) -> RateFit:
    """Least-squares line through (log x, log y); residual is the RMS misfit."""
    x = np.asarray(sweep, dtype=float)
    y = np.asarray(deviations, dtype=float)
    if x.shape != y.shape or len(x) < 3:
        raise ValidationError("fit_rate needs at least 3 matching sweep points")
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValidationError("fit_rate needs positive sweep values and deviations")
    lx, ly = np.log(x), np.log(y)
    slope, icpt = np.polyfit(lx, ly, 1)
    res = float(np.sqrt(np.mean((ly - (slope * lx + icpt)) ** 2)))
    return RateFit(tuple(x), tuple(y), float(slope), float(icpt), res)


def pmap(fn: Callable, items, threads: int = 1) -> list:
    items = list(items)
    if threads <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


# ------------------------------------------------------------------ schema

@dataclass(frozen=True)
class Param:
    kind: str  # int, float, str, int_list, float_list, str_list, graph_list
    default: object
    increasing: bool = False
    positive: bool = False


@dataclass(frozen=True)
class Scenario:
    name: str
    subcommand: str
    criterion: int
    params: dict
    run: Callable


REGISTRY: dict = {}


def scenario(name: str, subcommand: str, criterion: int, **params):
    def deco(fn):
        REGISTRY[name] = Scenario(name, subcommand, criterion, params, fn)
        return fn
    return deco


def validate_params(sc: Scenario, raw: dict, base_dir=None) -> tuple:
    """Returns (params, errors) with every problem reported, each with a field path."""
    import os
    out, errors = {}, []
    for key in raw:
        if key not in sc.params:
            errors.append(f"params.{key}: unknown parameter for scenario {sc.name!r}")
    for key, p in sc.params.items():
        val = raw.get(key, p.default)
        path = f"params.{key}"
        try:
            if p.kind == "int":
                if isinstance(val, bool) or int(val) != val:
                    raise TypeError
                val = int(val)
            elif p.kind == "float":
                val = float(val)
            elif p.kind == "str":
                val = str(val)
            elif p.kind.endswith("_list"):
                if not isinstance(val, (list, tuple)):
                    raise TypeError
                if len(val) == 0:
                    errors.append(f"{path}: sweep list must not be empty")
                    continue
                conv = {"int_list": int, "float_list": float, "str_list": str, "graph_list": str}[p.kind]
                if p.kind == "int_list" and any(isinstance(v, bool) or int(v) != v for v in val):
                    raise TypeError
                val = [conv(v) for v in val]
        except (TypeError, ValueError):
            errors.append(f"{path}: expected {p.kind}, got {val!r}")
            continue
        if p.increasing and any(b <= a for a, b in zip(val, val[1:])):
            errors.append(f"{path}: sweep list must be strictly increasing")
        if p.positive:
            vals = val if isinstance(val, list) else [val]
            if any(v <= 0 for v in vals):
                errors.append(f"{path}: values must be positive")
        if p.kind == "graph_list":
            resolved = []
            for g in val:
                if g in crystal.SHIPPED_GRAPHS:
                    resolved.append(g)
                    continue
                cand = g if base_dir is None or os.path.isabs(g) else os.path.join(base_dir, g)
                stem = os.path.splitext(os.path.basename(g))[0]
                if stem in crystal.SHIPPED_GRAPHS and not os.path.exists(cand):
                    resolved.append(stem)
                elif os.path.exists(cand):
                    resolved.append(cand)
                else:
                    errors.append(f"{path}: graph spec {g!r} not found")
            val = resolved
        out[key] = val
    return out, errors


# --------------------------------------------------------------- crystal

EXPECTED_POINT_WEIGHTS = {
    "strip3": {0: [3 / 8, 1 / 4, 3 / 8], 1: [1 / 4, 1 / 2, 1 / 4], 2: [3 / 8, 1 / 4, 3 / 8]},
    "cylinder4": {p: list(np.roll([3 / 8, 1 / 8, 3 / 8, 1 / 8], p)) for p in range(4)},
    "ladder": {p: [1 / 2, 1 / 2] for p in range(2)},
    "honeycomb": {p: [1 / 2, 1 / 2] for p in range(2)},
}

EXPECTED_CELL_UNIFORM = {
    "strip3": [1 / 4, 1 / 2, 1 / 4],
    "cylinder4": [1 / 4] * 4,
}


def _graph_key(g: str) -> str:
    import os
    return os.path.splitext(os.path.basename(g))[0]


@scenario("strip3-weights", "crystal", 1,
          graphs=Param("graph_list", ["strip3", "cylinder4", "ladder", "honeycomb"]),
          N=Param("int", 8, positive=True),
          dense_N=Param("int", 8, positive=True))
def run_crystal_weights(p, tol=None, threads=1):
    rows, checks = [], []
    exact_err, dense_err = 0.0, 0.0
    for g in p["graphs"]:
        spec = crystal.load_graph(g)
        key = _graph_key(g)
        grid = crystal.band_grid(spec, p["N"], tol)
        for vp in range(spec.nu):
            w = crystal.point_mass_weights(grid, vp)
            ref = EXPECTED_POINT_WEIGHTS.get(key, {}).get(vp)
            err = float(np.max(np.abs(w - ref))) if ref is not None else float("nan")
            if ref is not None:
                exact_err = max(exact_err, err)
            # dense oracle on layer indicators a = 1 on layer q, 0 elsewhere
            psi0 = crystal.point_mass_state(spec, p["dense_N"], vp)
            dense = []
            for q in range(spec.nu):
                a = np.zeros(crystal.state_shape(spec, p["dense_N"]))
                a[..., q] = 1.0
                rep = crystal.numeric_crosscheck(spec, p["dense_N"], psi0, a, grouping_tolerance=tol)
                dense.append(rep.numeric.real)
            derr = float(np.max(np.abs(np.array(dense) - w)))
            dense_err = max(dense_err, derr)
            rows.append([key, vp, " ".join(f"{x:.17g}" for x in w),
                         " ".join(f"{x:.17g}" for x in ref) if ref is not None else "", err, derr])
    checks.append(Check("closed-form weights max error", exact_err, 1e-12, "<="))
    checks.append(Check("dense cross-check max error", dense_err, 1e-9, "<="))
    return ScenarioResult("strip3-weights", {"weights": Table(
        ["graph", "p", "weights", "expected", "abs_error", "dense_abs_error"], rows)}, checks)


@scenario("cell-uniform", "crystal", 2,
          graphs=Param("graph_list", ["strip3", "cylinder4"]),
          N=Param("int", 8, positive=True),
          seed=Param("int", 7))
def run_cell_uniform(p, tol=None, threads=1):
    rng = np.random.default_rng(p["seed"])
    rows, worst = [], 0.0
    for g in p["graphs"]:
        spec = crystal.load_graph(g)
        key = _graph_key(g)
        grid = crystal.band_grid(spec, p["N"], tol)
        psi0 = crystal.cell_uniform_state(spec, p["N"])
        w = crystal.general_weights(grid, psi0)
        alpha = rng.uniform(-1, 1, spec.nu)
        val = crystal.limit_average_general(grid, psi0, alpha)
        ref_w = EXPECTED_CELL_UNIFORM.get(key)
        ref = float(np.dot(ref_w, alpha)) if ref_w is not None else float("nan")
        err = abs(val - ref) if ref_w is not None else float("nan")
        if ref_w is not None:
            worst = max(worst, err, float(np.max(np.abs(w - ref_w))))
        rows.append([key, " ".join(f"{x:.17g}" for x in w), val, ref, err])
    return ScenarioResult("cell-uniform", {"cell_uniform": Table(
        ["graph", "weights", "value", "reference", "abs_error"], rows)},
        [Check("cell-uniform max error", worst, 1e-12, "<=")])


@scenario("flat-band", "crystal", 11,
          N=Param("int_list", [8, 16, 32], increasing=True, positive=True),
          evolve_N=Param("int", 8, positive=True),
          t_max=Param("float", 10.0, positive=True),
          dt=Param("float", 0.5, positive=True))
def run_flat_band(p, tol=None, threads=1):
    spec = crystal.load_graph("flatband")
    N = p["evolve_N"]
    psi0 = np.zeros(crystal.state_shape(spec, N), dtype=complex)
    psi0[N // 2, 0] = 1 / np.sqrt(2)
    psi0[N // 2, 1] = -1 / np.sqrt(2)
    dec = spectral.eigendecompose(crystal.dense_hamiltonian(spec, N), tol)
    times = np.arange(0.0, p["t_max"] + 1e-9, p["dt"])
    drift = 0.0
    series = []
    for t in times:
        psi = spectral.evolve(dec, psi0.ravel(), t)
        dev = float(np.max(np.abs(np.abs(psi) - np.abs(psi0.ravel()))))
        drift = max(drift, dev)
        series.append([t, dev])
    ratios = pmap(lambda n: crystal.floquet_condition_ratio(crystal.band_grid(spec, n, tol)), p["N"], threads)
    flats = crystal.flat_band_detect(crystal.band_grid(spec, p["N"][0], tol))
    checks = [Check("max pointwise modulus drift", drift, 1e-12, "<="),
              Check("min Floquet-condition ratio", min(ratios), 0.2, ">="),
              Check("flat band at energy 0 detected", float(any(abs(f.energy) < 1e-9 for f in flats)), 1.0, ">=")]
    return ScenarioResult("flat-band", {
        "modulus_drift": Table(["t", "max_abs_modulus_change"], series),
        "floquet_ratio": Table(["N", "ratio"], [[n, r] for n, r in zip(p["N"], ratios)])}, checks)


def _random_hermitian(rng, dim):
    X = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (X + X.conj().T) / (2 * np.sqrt(dim))


@scenario("oracle-equivalence", "crystal", 12,
          instances=Param("int", 20, positive=True),
          max_dim=Param("int", 64, positive=True),
          T=Param("float", 1e5, positive=True),
          N_1d=Param("int", 16, positive=True),
          N_2d=Param("int", 4, positive=True),
          seed=Param("int", 12345))
def run_oracle_equivalence(p, tol=None, threads=1):
    rng = np.random.default_rng(p["seed"])
    T = p["T"]
    cases = []
    for i in range(p["instances"]):
        dim = int(rng.integers(2, p["max_dim"] + 1))
        H = _random_hermitian(rng, dim)
        psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        cases.append((f"random-{i}", H, psi / np.linalg.norm(psi), rng.uniform(-1, 1, dim)))
    for g in crystal.SHIPPED_GRAPHS:
        spec = crystal.load_graph(g)
        N = p["N_1d"] if spec.d == 1 else p["N_2d"]
        H = crystal.dense_hamiltonian(spec, N)
        dim = H.shape[0]
        psi = np.zeros(dim, dtype=complex)
        psi[0] = 1.0
        cases.append((f"{g}-N{N}", H, psi, rng.uniform(-1, 1, dim)))

    def one(case):
        name, H, psi, a = case
        dec = spectral.eigendecompose(H, tol)
        lim = spectral.infinite_time_average_expectation(dec, psi, a)
        quad = oracles.dense_quadrature_average(H, psi, a, T)
        bound = 2 * np.max(np.abs(a)) / (T * dec.min_gap()) + 1e-9
        return [name, H.shape[0], lim.real, quad.real, abs(lim - quad), bound]

    rows = pmap(one, cases, threads)
    worst = max(r[4] / r[5] for r in rows)
    return ScenarioResult("oracle-equivalence", {"oracle": Table(
        ["instance", "dim", "closed_form", "quadrature", "abs_diff", "bound"], rows)},
        [Check("max |closed - quadrature| / bound", worst, 1.0, "<=")])


# --------------------------------------------------------------- lattice

def _rate_observable(torus_):
    n = np.arange(torus_.N)
    k = 1 if torus_.N % 2 else 2
    return lattice.LatticeObservable.from_samples(torus_, 2 * np.cos(2 * np.pi * k * n / torus_.N))


def _rate_reference(N, v):
    return 2 * np.cos(2 * np.pi * v / N) / N if N % 2 else 4 * np.cos(4 * np.pi * v / N) / N


@scenario("prop15", "lattice", 3,
          N=Param("int_list", [5, 6, 7, 8, 9, 10, 11], increasing=True, positive=True))
def run_rate(p, tol=None, threads=1):
    rows, worst = [], 0.0
    for N in p["N"]:
        T = lattice.LatticeTorus(1, N)
        a = _rate_observable(T)
        for v in range(N):
            dev = (lattice.exact_time_average_limit(T, (v,), a) - a.mean).real
            ref = _rate_reference(N, v)
            worst = max(worst, abs(dev - ref))
            rows.append([N, v, dev, ref, abs(dev - ref)])
    checks = [Check("max |deviation - closed form|", worst, 1e-12, "<=")]
    fits = []
    for parity, label in ((1, "odd"), (0, "even")):
        Ns = [N for N in p["N"] if N % 2 == parity]
        if len(Ns) >= 3:
            devs = [abs(r[2]) for r in rows if r[0] in Ns and r[1] == 0]
            fit = fit_rate(Ns, devs)
            fits.append([label, fit.slope, fit.residual])
            checks.append(Check(f"|slope + 1| ({label} N)", abs(fit.slope + 1), 0.05, "<="))
    return ScenarioResult("prop15", {"deviation": Table(["N", "v", "deviation", "reference", "abs_error"], rows),
                                     "fit": Table(["parity", "slope", "residual"], fits)}, checks)


@scenario("fourier-bound", "lattice", 4,
          d=Param("int_list", [1, 2], increasing=True, positive=True),
          N=Param("int_list", [8, 16, 32, 64], increasing=True, positive=True),
          K=Param("int", 16, positive=True),
          seeds=Param("int", 3, positive=True),
          sites=Param("int", 3, positive=True))
def run_fourier_bound(p, tol=None, threads=1):
    jobs = [(d, N, s) for d in p["d"] for N in p["N"] for s in range(p["seeds"])]

    def one(job):
        d, N, s = job
        fhat = lattice.random_fourier_coefficients(d, p["K"], seed=1000 * d + s)
        l1 = float(sum(abs(v) for v in fhat.values()))
        T = lattice.LatticeTorus(d, N)
        a = lattice.scaled_function_observable(T, fhat)
        rng = np.random.default_rng(s)
        out = []
        for _ in range(p["sites"]):
            v = tuple(int(x) for x in rng.integers(0, N, d))
            dev = abs(lattice.exact_time_average_limit(T, v, a) - a.mean)
            out.append([d, N, s, " ".join(map(str, v)), dev, 2 * l1 / N, dev <= 2 * l1 / N])
        return out

    rows = [r for chunk in pmap(one, jobs, threads) for r in chunk]
    worst = max(r[4] / r[5] for r in rows)
    return ScenarioResult("fourier-bound", {"bound": Table(
        ["d", "N", "seed", "v", "deviation", "bound", "within"], rows)},
        [Check("max deviation / bound", worst, 1.0, "<=")])


@scenario("order-of-limits", "lattice", 5,
          N=Param("int_list", [64, 128, 256], increasing=True, positive=True),
          t=Param("float_list", [1.0, 5.0, 10.0], increasing=True, positive=True),
          v=Param("int", 0),
          threshold=Param("float", 0.4))
def run_order_of_limits(p, tol=None, threads=1):
    rows = []
    for t in p["t"]:
        for N, val, mean, gap in lattice.invertlim_experiment(1, p["N"], t, v=(p["v"],)):
            rows.append([t, N, val, mean, gap])
    worst = min(r[4] for r in rows)
    return ScenarioResult("order-of-limits", {"gap": Table(["t", "N", "expectation", "mean", "gap"], rows)},
                          [Check("min gap over tested (N, t)", worst, p["threshold"], ">=")])


@scenario("no-time-limit", "lattice", 6,
          N=Param("int", 5, positive=True),
          v=Param("int", 0),
          t_max=Param("int", 2000, positive=True),
          tail_start=Param("float", 500.0))
def run_no_time_limit(p, tol=None, threads=1):
    times = np.arange(0, p["t_max"] + 1)
    s = lattice.noav_experiment(p["N"], p["v"], times, p["tail_start"])
    inst, win = s.tail_amplitudes()
    rows = [[t, a.real, a.imag, b.real, b.imag] for t, a, b in zip(times, s.instantaneous, s.windowed)]
    return ScenarioResult("no-time-limit", {"series": Table(["t", "inst_re", "inst_im", "win_re", "win_im"], rows)},
                          [Check("instantaneous tail amplitude", inst, 0.1, ">"),
                           Check("windowed tail amplitude", win, 0.05, ">")])


# ----------------------------------------------------------------- torus

TORUS_HEADER = ["E", "T", "value_re", "value_im", "reference", "abs_error", "term2", "term3"]


def _torus_rows(rows):
    return [[r.E, r.T, r.value.real, r.value.imag, r.reference.real, r.abs_error,
             abs(r.term2), abs(r.term3)] for r in rows]


@scenario("torus-decay", "torus", 7,
          E=Param("float_list", [1e2, 1e3, 1e4, 1e5], increasing=True, positive=True),
          K=Param("int", 8, positive=True),
          T=Param("float", 1.0, positive=True),
          y=Param("float", 0.3),
          seed=Param("int", 3))
def run_torus_decay(p, tol=None, threads=1):
    a = torus.smooth_observable(1, p["K"], p["seed"])
    rows = [r for chunk in pmap(lambda E: torus.energy_sweep([p["y"]], [E], a, p["T"]), p["E"], threads)
            for r in chunk]
    errs = [r.abs_error for r in rows]
    fit = fit_rate([r.E for r in rows], errs)
    return ScenarioResult("torus-decay", {"sweep": Table(TORUS_HEADER, _torus_rows(rows)),
                                          "fit": Table(["slope", "residual"], [[fit.slope, fit.residual]])},
                          [Check("deviation strictly decreasing", float(np.all(np.diff(errs) < 0)), 1.0, ">="),
                           Check("fitted log-slope", fit.slope, -0.2, "<=")])


@scenario("time-averaging-necessary", "torus", 8,
          K=Param("int_list", [3, 10, 30], increasing=True, positive=True),
          n_max=Param("int", 40, positive=True),
          y=Param("float", 0.3))
def run_time_averaging_necessary(p, tol=None, threads=1):
    rows, worst, smallest = [], 0.0, np.inf
    e1 = torus.mode_observable([1])
    for K in p["K"]:
        E = torus.half_integer_energy(K)
        st = torus.sharp_state([p["y"]], E)
        cE = torus.revival_constant(E)
        for n in range(p["n_max"] + 1):
            val = torus.instantaneous_expectation(st, e1, n / (4 * np.pi))
            ref = cE * (-1) ** n * np.exp(2j * np.pi * p["y"])
            worst = max(worst, abs(val - ref))
            smallest = min(smallest, abs(val))
            rows.append([E, n, val.real, val.imag, ref.real, ref.imag, abs(val - ref)])
    return ScenarioResult("time-averaging-necessary", {"revival": Table(
        ["E", "n", "value_re", "value_im", "ref_re", "ref_im", "abs_error"], rows)},
        [Check("max |value - c_E (-1)^n e_1(y)|", worst, 1e-10, "<="),
         Check("min |value| along t = n/(4 pi) (distance from <e_1> = 0)", smallest, 0.5, ">=")])


@scenario("box-states", "torus", 9,
          eps=Param("float_list", [0.2, 0.1, 0.05, 0.02], positive=True),
          y=Param("float", 0.1),
          x=Param("float", 0.6),
          T=Param("float", 1.0, positive=True),
          K=Param("int", 8, positive=True),
          seed=Param("int", 1),
          loss=Param("float", 1e-3, positive=True))
def run_box_states(p, tol=None, threads=1):
    eps = p["eps"]
    if any(b >= a for a, b in zip(eps, eps[1:])):
        raise ValidationError("params.eps: sweep must be strictly decreasing")
    a2 = torus.mode_observable([2])
    smooth = torus.smooth_observable(1, p["K"], p["seed"])

    def one(e):
        st = torus.box_state([p["y"]], e, p["loss"])
        other = torus.box_state([p["x"]], e, p["loss"])
        v = torus.position_space_average(st, st, a2, p["T"])
        c = torus.position_space_average(other, st, smooth, p["T"])
        return [e, p["T"], v.value.real, v.value.imag, 0.0, abs(v.value), abs(v.term2), abs(v.term3),
                abs(c.value), max(st.truncation_loss, other.truncation_loss)]

    rows = pmap(one, eps, threads)
    mags = [r[5] for r in rows]
    return ScenarioResult("box-states", {"sweep": Table(
        ["eps", "T", "value_re", "value_im", "reference", "abs_error", "term2", "term3",
         "cross_abs", "truncation_loss"], rows)},
        [Check("|value| strictly decreasing in eps", float(np.all(np.diff(mags) < 0)), 1.0, ">="),
         Check("disjoint-box cross average at smallest eps", rows[-1][8], 0.05, "<="),
         Check("max truncation loss", max(r[9] for r in rows), p["loss"] * (1 + 1e-9), "<=")])


# ---------------------------------------------------------------- sphere

@scenario("sphere-gap", "sphere", 10,
          n=Param("int_list", [10, 20, 40, 80, 160], increasing=True, positive=True),
          n_bound_max=Param("int", 500, positive=True),
          n_gap=Param("int", 200, positive=True),
          k_limit=Param("int", 50, positive=True),
          n_dixon=Param("int", 500, positive=True))
def run_sphere_gap(p, tol=None, threads=1):
    checks = []
    moment_err = max(abs(sphere.ztilde_quadratic_expectation(k) - sphere.ztilde_quadratic_quadrature(k))
                     for k in range(0, p["k_limit"] + 1))
    checks.append(Check("moment closed form vs quadrature", moment_err, 1e-10, "<="))
    checks.append(Check(f"|<Z~,t^2 Z~> - 1/2| at k={p['k_limit']}",
                        abs(sphere.ztilde_quadratic_expectation(p["k_limit"]) - 0.5), 2e-3, "<="))
    checks.append(Check("|uniform average - 1/3|", abs(sphere.uniform_average_quadratic() - 1 / 3), 1e-12, "<="))
    margins = [sphere.s_state_quadratic_average(n) - sphere.s_state_lower_bound(n)
               for n in range(1, p["n_bound_max"] + 1)]
    checks.append(Check("min (S-state average - lower bound)", min(margins), 0.0, ">="))
    gap_val = sphere.s_state_quadratic_average(p["n_gap"])
    checks.append(Check(f"S-state average at n={p['n_gap']}", gap_val, 0.45, ">="))
    checks.append(Check(f"gap to uniform 1/3 at n={p['n_gap']}", gap_val - 1 / 3, 0.11, ">="))
    rows = pmap(lambda n: sphere.sphere_table([n])[0], p["n"], threads)
    peak = [r[1] for r in rows]
    checks.append(Check("p(xi) strictly increasing", float(np.all(np.diff(peak) > 0)), 1.0, ">="))
    checks.append(Check("p(xi) log-slope", fit_rate(p["n"], peak).slope, 0.2, ">="))
    off = [r[2] for r in rows]
    checks.append(Check("p(eta=0.3) max/min", max(off) / min(off), 3.0, "<="))
    dixon_err = max(sphere.dixon_sum_check(n).relative_error for n in range(0, p["n_dixon"] + 1))
    checks.append(Check("Dixon direct vs closed form (relative)", dixon_err, 1e-10, "<="))
    checks.append(Check(f"|Dixon ratio - 1| at n={p['n_dixon']}",
                        abs(sphere.dixon_sum_check(p["n_dixon"]).ratio - 1), 0.05, "<="))
    return ScenarioResult("sphere-gap", {"sphere": Table(
        ["n", "p_at_xi", "p_at_eta0.3", "quadratic_average", "lower_bound", "dixon_ratio"], rows)}, checks)


def scenarios_for(subcommand: str) -> list:
    return sorted(name for name, sc in REGISTRY.items() if sc.subcommand == subcommand)
