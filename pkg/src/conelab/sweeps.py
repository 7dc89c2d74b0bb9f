"""Parameter sweeps: build a family at each delta, measure a ratio, fit the
power law log(ratio) = alpha * log(1/delta) + c.

Every experiment is deterministic given its seed.  Random inputs draw
i.i.d. complex Gaussian frequency coefficients on the admissible support;
the per-delta statistic is the median ratio over seeds (robust to
interference outliers), taken together with the deterministic focusing
input where one exists.
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.fft

from .bumps import adapted_bump, cap_cutoff, annulus_partition
from .errors import DomainError, SizingError
from .geometry import (Plank, cone_planks, omega_cover, sector_polyhedra,
                       separated_caps, dual_box)
from .grid import Field, GridSpec, forward_transform, inverse_transform, lp_norm
from .operators import (MaximalConfig, cordoba_fefferman_check,
                        conical_cap_family, plank_lp_check, strong_maximal,
                        weighted_l2_check)
from .overlap import SamplerConfig, counting_lp, pairwise_disjoint
from .packets import ExtremizerConfig, build_extremizer, overlap_ratio
from .squarefn import (assemble_h, high_low_split, kakeya_decomposition_check,
                       square_ratio_sparse)

__all__ = [
    "EXPERIMENTS",
    "ExperimentConfig",
    "SweepResult",
    "fit_exponent",
    "run_sweep",
    "report",
    "sized_grid",
]

EXPERIMENTS = ("cordoba2d", "smooth_caps_nd", "sharp_polyhedra", "cone_l8",
               "reverse_sqfn", "lemma_suite", "extremizer_sweep",
               "maximal_sweep")

#: lower/upper slack around the expected exponent used for the CSV pass flag
DEFAULT_WINDOW = (0.05, 0.08)


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    n: int = 2
    p: float = 4.0
    deltas: tuple = (2.0**-3, 2.0**-4, 2.0**-5)
    engine: str = "fft"
    K: float = 4.0
    gamma: float = 0.25
    m_separation: int = 8
    seed: int = 0
    seeds: int = 20
    samples: int = 200_000
    threads: int = 1
    variant: str | None = None
    tolerance: tuple = DEFAULT_WINDOW
    out_dir: str = "out"

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise DomainError(f"unknown experiment {self.experiment!r}")
        if self.engine not in ("fft", "overlap"):
            raise DomainError(f"unknown engine {self.engine!r}")
        if not self.deltas:
            raise DomainError("empty delta list")
        for d in self.deltas:
            k = math.log2(d)
            if d <= 0 or abs(k - round(k)) > 1e-12:
                raise DomainError(f"deltas must be dyadic, got {d}")
        if any(b >= a for a, b in zip(self.deltas, self.deltas[1:])):
            raise DomainError("deltas must be strictly decreasing")
        if self.seeds < 1:
            raise DomainError("need at least one seed")


@dataclass
class SweepResult:
    config: ExperimentConfig
    points: list            # (delta, statistic, stderr)
    rows: list              # per-measurement dicts for the CSV
    exponent: float
    prefactor: float
    residual: float
    expected: float

    @property
    def passed(self) -> bool:
        lo, hi = self.config.tolerance
        return self.expected - lo <= self.exponent <= self.expected + hi


def sized_grid(delta: float, dim: int, scale: float = 16.0,
               length: float | None = None) -> GridSpec:
    """Grid for a delta-resolved frequency experiment.

    points_per_axis = scale/delta (a power of two for dyadic delta), period
    scale/(4 delta) unless overridden.  Refuses oversized grids, reporting
    the coarsest delta that would not fit.
    """
    N = int(round(scale / delta))
    L = length if length is not None else scale / (4.0 * delta)
    try:
        return GridSpec(dim, L, N)
    except SizingError:
        d = delta
        while d < 0.5:
            d *= 2.0
            try:
                GridSpec(dim, (length if length is not None
                               else scale / (4.0 * d)), int(round(scale / d)))
                break
            except SizingError:
                continue
        raise SizingError(
            f"delta={delta:g} needs a {N}^{dim} grid beyond the memory "
            f"ceiling; coarsest feasible delta is {d:g}")


def fit_exponent(points) -> tuple[float, float, float]:
    """OLS fit of log(ratio) against log(1/delta).

    Returns (alpha, prefactor, residual) with residual the RMS of the fit
    errors in log space.  Needs at least three points and positive ratios.
    """
    pts = [(d, r) for d, r, *_ in points]
    if len(pts) < 3:
        raise DomainError("need at least 3 points for an exponent fit")
    if any(r <= 0 for _, r in pts):
        raise DomainError("ratios must be positive for a log-log fit")
    x = np.log([1.0 / d for d, _ in pts])
    y = np.log([r for _, r in pts])
    alpha, c = np.polyfit(x, y, 1)
    resid = float(np.sqrt(np.mean((y - (alpha * x + c)) ** 2)))
    return float(alpha), float(math.exp(c)), resid


# ---------------------------------------------------------------------------
# per-experiment measurement kernels
#
# Each prepare_* builds the shared per-delta state (grids, sparse symbols,
# tube families); each measure takes (ctx, seed) with seed == -1 meaning the
# deterministic focusing input, and returns (ratio, stderr).


def _annulus_sectors(spec: GridSpec, delta: float):
    """Sharp delta-sectors of the annulus 1/2 <= |xi| <= 1, as sparse
    (flat index, coefficient) symbol pairs plus the support indices."""
    xi = np.broadcast_arrays(*spec.frequency_mesh())
    r = np.hypot(xi[0], xi[1]).ravel()
    ang = np.mod(np.arctan2(xi[1], xi[0]).ravel(), 2.0 * math.pi)
    support = np.flatnonzero((r >= 0.5) & (r <= 1.0))
    count = max(4, int(round(2.0 * math.pi / delta)))
    bins = np.minimum((ang[support] * count / (2.0 * math.pi)).astype(int),
                      count - 1)
    order = np.argsort(bins, kind="stable")
    pieces = []
    for idx in np.split(support[order], np.flatnonzero(np.diff(bins[order])) + 1):
        pieces.append((idx, np.ones(idx.size, dtype=np.complex64)))
    return pieces, support


def _prepare_cordoba(cfg: ExperimentConfig, delta: float):
    spec = sized_grid(delta, 2, scale=8.0)
    pieces, support = _annulus_sectors(spec, delta)
    return {"spec": spec, "pieces": pieces, "support": support, "p": cfg.p}


def _measure_cordoba(ctx, seed: int):
    spec = ctx["spec"]
    fhat = np.zeros(spec.shape, dtype=np.complex64)
    flat = fhat.ravel()
    if seed < 0:
        flat[ctx["support"]] = 1.0
    else:
        rng = np.random.default_rng(seed)
        n = ctx["support"].size
        flat[ctx["support"]] = (rng.standard_normal(n)
                                + 1j * rng.standard_normal(n)).astype(np.complex64)
    f = Field(spec, "frequency", fhat)
    return square_ratio_sparse(f, ctx["pieces"], ctx["p"]), 0.0


def _prepare_smooth_caps(cfg: ExperimentConfig, delta: float):
    spec = sized_grid(delta, cfg.n, scale=8.0 if cfg.n == 2 else 4.0)
    caps = separated_caps(cfg.n, math.sqrt(delta))
    # one smooth shell 1/2 <~ |xi| <~ 1 so the pieces are genuinely conical
    rho = annulus_partition(-1, -1)[0]
    fam = conical_cap_family(caps, radial=rho)
    pieces = [m.sample_sparse(spec) for m in fam.multipliers()]
    support = np.unique(np.concatenate([idx for idx, _ in pieces]))
    return {"spec": spec, "pieces": pieces, "support": support, "p": cfg.p}


def _measure_smooth_caps(ctx, seed: int):
    return _measure_cordoba(ctx, seed)


def _prepare_sharp_polyhedra(cfg: ExperimentConfig, delta: float):
    spec = sized_grid(delta, cfg.n, scale=8.0 if cfg.n == 2 else 4.0)
    count = max(4, int(round(2.0 * math.pi / delta)))
    polys = sector_polyhedra(count, cfg.n)
    xi = np.broadcast_arrays(*spec.frequency_mesh())
    r = np.sqrt(sum(g.astype(float) ** 2 for g in np.broadcast_arrays(*xi))).ravel()
    pts = np.stack([g.ravel() for g in xi], axis=1).astype(float)
    support_mask = (r >= 0.5) & (r <= 1.0)
    owner = np.full(r.size, -1, dtype=np.int64)
    todo = np.flatnonzero(support_mask)
    for i, poly in enumerate(polys):
        if todo.size == 0:
            break
        hit = poly.contains_direction(pts[todo])
        owner[todo[hit]] = i
        todo = todo[~hit]
    pieces = []
    for i in range(len(polys)):
        idx = np.flatnonzero(owner == i)
        if idx.size:
            pieces.append((idx, np.ones(idx.size, dtype=np.complex64)))
    support = np.flatnonzero(support_mask)
    return {"spec": spec, "pieces": pieces, "support": support, "p": cfg.p}


def _measure_sharp_polyhedra(ctx, seed: int):
    return _measure_cordoba(ctx, seed)


def _prepare_cone_overlap(cfg: ExperimentConfig, delta: float):
    kind = cfg.variant or "cone_l8_A2"
    ext = build_extremizer(ExtremizerConfig(kind=kind, dim=3, p=cfg.p,
                                            delta=delta))
    return {"ext": ext, "samples": cfg.samples,
            "disjoint": pairwise_disjoint(ext.family)}


def _measure_cone_overlap(ctx, seed: int):
    sampler = SamplerConfig(mode="monte_carlo", samples=ctx["samples"],
                            seed=max(seed, 0))
    res = overlap_ratio(ctx["ext"], sampler, disjoint=ctx["disjoint"])
    return res.value, res.stderr


def _measure_cone_lattice(ctx, seed: int):
    """Deterministic cross-check: regular-grid quadrature of the same
    counting functional the Monte-Carlo engine estimates."""
    ext = ctx["ext"]
    p = ext.config.p
    if ctx["disjoint"]:
        den = ext.family.total_volume() ** (1.0 / p)
    else:
        den = counting_lp(ext.family, p,
                          SamplerConfig(mode="lattice",
                                        samples=ctx["samples"])).value
    num = counting_lp(ext.dilated, p / 2.0,
                      SamplerConfig(mode="lattice", samples=ctx["samples"]),
                      domain=(ext.focal_lo, ext.focal_hi))
    return math.sqrt(num.value) / den, 0.0


def _prepare_reverse(cfg: ExperimentConfig, delta: float):
    spec = sized_grid(delta, 3)
    planks = cone_planks(delta)
    sq = np.zeros(spec.shape, dtype=np.float32)
    syms = []
    buf = np.zeros(spec.shape, dtype=np.complex64)
    flat = buf.ravel()
    for pk in planks:
        idx, vals = adapted_bump(pk).sample_sparse(spec)
        syms.append((idx, vals.astype(np.complex64)))
        flat[:] = 0
        flat[idx] = vals.astype(np.complex64)
        piece = scipy.fft.ifftn(scipy.fft.ifftshift(buf)) / spec.spacing**3
        sq += piece.real**2 + piece.imag**2
    rhs = lp_norm(Field(spec, "physical",
                        np.sqrt(sq).astype(np.complex128)), 4)
    return {"spec": spec, "syms": syms, "rhs": rhs}


def _measure_reverse(ctx, seed: int):
    spec = ctx["spec"]
    rng = np.random.default_rng(max(seed, 0))
    signs = rng.choice([-1.0, 1.0], size=len(ctx["syms"]))
    fhat = np.zeros(spec.shape, dtype=np.complex64)
    flat = fhat.ravel()
    for eps, (idx, vals) in zip(signs, ctx["syms"]):
        flat[idx] += np.complex64(eps) * vals
    f = scipy.fft.ifftn(scipy.fft.ifftshift(fhat)) / spec.spacing**3
    lhs = lp_norm(Field(spec, "physical", f.astype(np.complex128)), 4)
    return lhs / ctx["rhs"], 0.0


def _prepare_extremizer(cfg: ExperimentConfig, delta: float):
    kind = cfg.variant or ("bochner_riesz" if cfg.n == 2 else "sharp_cutoff_A1")
    ext = build_extremizer(ExtremizerConfig(kind=kind, dim=cfg.n, p=cfg.p,
                                            delta=delta))
    return {"ext": ext, "samples": cfg.samples,
            "disjoint": pairwise_disjoint(ext.family)}


def _prepare_maximal(cfg: ExperimentConfig, delta: float):
    spec = GridSpec(2, 8.0, 256)
    count = max(2, int(round(1.0 / delta)))
    ang = math.pi * np.arange(count) / count
    dirs = np.stack([np.cos(ang), np.sin(ang)], axis=1)
    return {"spec": spec, "dirs": dirs}


def _measure_maximal(ctx, seed: int):
    spec = ctx["spec"]
    rng = np.random.default_rng(max(seed, 0))
    gv = rng.uniform(0.0, 1.0, spec.shape) ** 4  # spiky nonnegative weight
    g = Field(spec, "physical", gv.astype(np.complex128))
    m = strong_maximal(g, ctx["dirs"], MaximalConfig())
    return lp_norm(m, 2) / lp_norm(g, 2), 0.0


def _prepare_lemma(cfg: ExperimentConfig, delta: float):
    return {"delta": delta, "n": cfg.n, "gamma": cfg.gamma, "K": cfg.K}


def lemma_suite_instance(delta: float, dim: int, seed: int,
                         gamma: float = 0.5, K: float = 4.0) -> dict:
    """One seeded random instance of each weighted-inequality check.

    Returns the realized lhs/rhs ratios keyed by check name; the suite
    statistic is their maximum.  2D runs the plank and sector checks,
    3D the conical decomposition check.
    """
    rng = np.random.default_rng(seed)
    out = {}
    if dim == 2:
        spec = GridSpec(2, 16.0, 256)
        th = rng.uniform(0.0, math.pi)
        A = np.array([[math.cos(th), math.sin(th)],
                      [-math.sin(th), math.cos(th)]])
        hw = np.array([2.0 * delta, math.sqrt(delta)])
        planks = []
        for i in range(-1, 2):
            for j in range(-1, 2):
                c = np.array([i * 8.0 * hw[0], j * 8.0 * hw[1]]) @ A
                planks.append(Plank(c, A, hw))
        fh = (rng.standard_normal(spec.shape)
              + 1j * rng.standard_normal(spec.shape))
        f = inverse_transform(Field(spec, "frequency", fh))
        gv = rng.uniform(0.05, 1.0, spec.shape)
        g = Field(spec, "physical", gv.astype(np.complex128))
        out["weighted_l2"] = weighted_l2_check(planks, f, g).ratio
        d = dual_box(planks[0])
        box = Plank(np.zeros(2), np.eye(2),
                    np.full(2, float(np.max(d.half_widths @ np.abs(d.axes)))
                            + 0.5))
        out["plank_lp"] = plank_lp_check(planks, f, 4.0, container=box).ratio

        cf_spec = GridSpec(2, 32.0, 512)
        count = max(4, int(round(2.0 * math.pi / delta)))
        poly = sector_polyhedra(count, 2)[int(rng.integers(count))]
        hh = (rng.standard_normal(cf_spec.shape)
              + 1j * rng.standard_normal(cf_spec.shape))
        h = inverse_transform(Field(cf_spec, "frequency", hh))
        gv = rng.uniform(0.05, 1.0, cf_spec.shape)
        g2 = Field(cf_spec, "physical", gv.astype(np.complex128))
        out["cordoba_fefferman"] = cordoba_fefferman_check(
            poly, h, g2, MaximalConfig()).ratio
    else:
        spec = GridSpec(3, 16.0, 128)
        omegas = omega_cover(gamma, delta, K=K)
        highs = []
        kept = []
        for om in omegas:
            idx, vals = adapted_bump(om).sample_sparse(spec)
            if idx.size == 0:
                continue
            fh = np.zeros(spec.shape, dtype=np.complex128)
            coef = (rng.standard_normal(idx.size)
                    + 1j * rng.standard_normal(idx.size))
            fh.ravel()[idx] = coef * vals
            highs.append(inverse_transform(Field(spec, "frequency", fh)))
            kept.append(om)
        out["kakeya_decomposition"] = kakeya_decomposition_check(
            highs, kept, delta, gamma, K=K).ratio
    return out


def _measure_lemma(ctx, seed: int):
    ratios = lemma_suite_instance(ctx["delta"], ctx["n"], max(seed, 0),
                                  gamma=ctx["gamma"], K=ctx["K"])
    return max(ratios.values()), 0.0


_DISPATCH = {
    "cordoba2d": (_prepare_cordoba, _measure_cordoba, True),
    "smooth_caps_nd": (_prepare_smooth_caps, _measure_smooth_caps, True),
    "sharp_polyhedra": (_prepare_sharp_polyhedra, _measure_sharp_polyhedra,
                        True),
    "cone_l8": (_prepare_cone_overlap, None, False),
    "reverse_sqfn": (_prepare_reverse, _measure_reverse, False),
    "lemma_suite": (_prepare_lemma, _measure_lemma, False),
    "extremizer_sweep": (_prepare_extremizer, None, False),
    "maximal_sweep": (_prepare_maximal, _measure_maximal, False),
}


def expected_exponent(cfg: ExperimentConfig) -> float:
    if cfg.experiment == "cordoba2d":
        return 0.0 if cfg.p <= 4.0 else 0.5 - 2.0 / cfg.p
    if cfg.experiment == "cone_l8":
        return 0.25 - 2.0 / cfg.p
    if cfg.experiment == "extremizer_sweep":
        return (cfg.n - 1) / 2.0 - cfg.n / cfg.p
    return 0.0


def run_sweep(cfg: ExperimentConfig) -> SweepResult:
    """Measure the configured ratio across deltas and fit the growth rate."""
    prepare, measure, has_focusing = _DISPATCH[cfg.experiment]
    if cfg.experiment in ("cone_l8", "extremizer_sweep"):
        measure = (_measure_cone_lattice if cfg.engine == "fft"
                   and cfg.experiment == "cone_l8" else _measure_cone_overlap)
    expected = expected_exponent(cfg)
    points, rows = [], []
    for delta in cfg.deltas:
        ctx = prepare(cfg, delta)
        seeds = list(range(cfg.seed, cfg.seed + cfg.seeds))
        if has_focusing:
            seeds = [-1] + seeds
        if cfg.experiment == "cone_l8" and cfg.engine == "fft":
            seeds = [-1]  # the quadrature is deterministic
        if cfg.threads > 1:
            with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
                results = list(pool.map(lambda s: measure(ctx, s), seeds))
        else:
            results = [measure(ctx, s) for s in seeds]
        by_seed = dict(zip(seeds, results))
        random_vals = [by_seed[s][0] for s in seeds if s >= 0]
        stat = float(np.median(random_vals)) if random_vals else by_seed[-1][0]
        err = (float(np.std(random_vals) / math.sqrt(len(random_vals)))
               if len(random_vals) > 1 else by_seed[seeds[0]][1])
        if -1 in by_seed and random_vals:
            stat = max(stat, by_seed[-1][0])
        points.append((delta, stat, err))
        for s in seeds:
            rows.append({"experiment": cfg.experiment, "n": cfg.n, "p": cfg.p,
                         "delta": delta, "engine": cfg.engine, "seed": s,
                         "ratio": by_seed[s][0], "stderr": by_seed[s][1],
                         "m": cfg.m_separation})
    if len(points) >= 3:
        alpha, pref, resid = fit_exponent(points)
    else:
        alpha, pref, resid = 0.0, points[-1][1], 0.0
    result = SweepResult(cfg, points, rows, alpha, pref, resid, expected)
    for r in rows:
        r.update({"alpha": alpha, "prefactor": pref, "residual": resid,
                  "expected_alpha": expected,
                  "pass": str(result.passed).lower()})
    return result


CSV_COLUMNS = ["experiment", "n", "p", "delta", "engine", "seed", "ratio",
               "stderr", "alpha", "prefactor", "residual", "expected_alpha",
               "pass", "m"]


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.10g}"
    return str(v)


def report(results: list[SweepResult], out_dir: str,
           stem: str = "sweep") -> list[str]:
    """Write one CSV for all sweeps plus a log-log plot per sweep.

    The CSV is byte-identical across reruns of the same configs; plots omit
    timestamps for the same reason.  Returns the written paths.
    """
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    csv_path = os.path.join(out_dir, f"{stem}.csv")
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for res in results:
            for row in res.rows:
                writer.writerow([_fmt(row[c]) for c in CSV_COLUMNS])
    paths.append(csv_path)

    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    for i, res in enumerate(results):
        fig, ax = plt.subplots(figsize=(5, 4))
        d = np.array([p[0] for p in res.points])
        r = np.array([p[1] for p in res.points])
        x = np.log2(1.0 / d)
        ax.plot(x, np.log2(r), "o", label="measured")
        if len(res.points) >= 3:
            xx = np.linspace(x.min(), x.max(), 50)
            ax.plot(xx, (res.exponent * xx * math.log(2)
                         + math.log(res.prefactor)) / math.log(2),
                    "-", label=f"fit alpha={res.exponent:.3f}")
            ax.plot(xx, res.expected * xx + np.log2(r[0])
                    - res.expected * x[0], "--",
                    label=f"expected alpha={res.expected:.3f}")
        ax.set_xlabel("log2(1/delta)")
        ax.set_ylabel("log2(ratio)")
        ax.set_title(f"{res.config.experiment} n={res.config.n} "
                     f"p={res.config.p:g} [{res.config.engine}]")
        ax.legend(fontsize=8)
        fig.tight_layout()
        path = os.path.join(out_dir, f"{stem}_{i}_{res.config.experiment}.svg")
        fig.savefig(path, metadata={"Date": None})
        plt.close(fig)
        paths.append(path)
    return paths
