"""Experiment orchestration: model -> projector -> cocycle / index, with CSV and JSON emission.

A config expands into independent work items (one per size and seed); each
item produces one or more ResultRecords.  Errors raised inside an item are
stored on its record so a sweep always runs to the end.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import time
import traceback
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .clifford import build_clifford
from .cocycle import central_identity_check, local_cocycle, random_shifts, weak_invariant_sigma12
from .config import DEFAULT_POINTS, ExperimentConfig
from .dirac import dirac_phase, fedosov_tindex, kernel_dims, summability_diagnostic
from .errors import GapClosedError, InvalidArgumentError, NumericalInconsistencyError
from .lattice import Geometry, build_hamiltonian, fermi_projector, sample_disorder
from .oracle import momentum_oracle_chern

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
CSV_BASE_COLUMNS = ["schema_version", "experiment_id", "kind", "item", "status", "error_type", "error_message", "wall_time"]


@dataclass
class ResultRecord:
    experiment_id: str
    kind: str
    item: int
    params: dict = field(default_factory=dict)
    values: dict = field(default_factory=dict)
    residuals: dict = field(default_factory=dict)
    status: str = "ok"
    error: dict | None = None
    wall_time: float = 0.0

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def to_dict(self) -> dict:
        return {
            "experiment_id": self.experiment_id,
            "kind": self.kind,
            "item": self.item,
            "params": self.params,
            "values": self.values,
            "residuals": self.residuals,
            "status": self.status,
            "error": self.error,
            "wall_time": self.wall_time,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ResultRecord":
        return cls(**data)

    def flat(self) -> dict:
        row = {
            "schema_version": SCHEMA_VERSION,
            "experiment_id": self.experiment_id,
            "kind": self.kind,
            "item": self.item,
            "status": self.status,
            "error_type": (self.error or {}).get("type", ""),
            "error_message": (self.error or {}).get("message", ""),
            "wall_time": self.wall_time,
        }
        for prefix, src in (("param", self.params), ("value", self.values), ("residual", self.residuals)):
            for k, v in src.items():
                row[f"{prefix}_{k}"] = json.dumps(v) if isinstance(v, (list, dict)) else v
        return row


def _jsonable(v):
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, complex):
        return [v.real, v.imag]
    return v


# ---------------------------------------------------------------- work items


class _Item:
    """One sweep point; its runner returns a list of (params, values, residuals[, table]) rows."""

    def __init__(self, cfg: ExperimentConfig, size, seed, extra=None):
        self.cfg = cfg
        self.size = size
        self.seed = seed
        self.extra = extra or {}

    def base_params(self) -> dict:
        p = {"size": self.size, "seed": self.seed, **self.extra}
        if self.cfg.kind != "identity-check":
            p["model"] = _model_params(self.cfg)
            p["fermi_level"] = self.cfg.fermi_level
        return p


def _model_params(cfg):
    m = cfg.model
    if m.hoppings:
        return {"name": m.name or "custom", "d": m.d, "Q": m.Q, "hoppings": m.hoppings, "disorder": m.disorder}
    return {"name": m.name, "params": dict(m.params)}


def _projector(cfg, geometry, seed):
    model = cfg.model.build()
    dis = None if model.is_clean else sample_disorder(geometry, seed)
    h = build_hamiltonian(model, geometry, dis)
    return fermi_projector(h, cfg.fermi_level)


def _oracle_value(cfg):
    """Momentum-space integer for clean d=2 models (or the single layer of a stack), else None."""
    model = cfg.model.build()
    if not model.is_clean:
        model = type(model)(model.d, model.Q, model.hoppings, {}, name=model.name)
    if model.d == 3 and model.name == "chern_stack":
        from .models import chern_model

        model = chern_model(cfg.model.params.get("m", 1.0))
    if model.d != 2:
        return None
    return _oracle_for(model, cfg.fermi_level, cfg.oracle_grid)


def _oracle_for(model, fermi_level, N):
    bands = _occupied_bands(model, fermi_level)
    if len(bands) in (0, model.Q):
        return 0  # p = 0 or p = 1
    return momentum_oracle_chern(model, bands=bands, N=N)


def _occupied_bands(model, fermi_level):
    # bands below the Fermi level at k = 0 (the oracle itself checks for gaps elsewhere)
    ev = np.linalg.eigvalsh(model.bloch(np.zeros(model.d)))
    return list(range(int(np.count_nonzero(ev < fermi_level))))


def _shifts(cfg, d):
    if cfg.shifts is not None:
        return [tuple(float(v) for v in x0) for x0 in cfg.shifts]
    if cfg.n_shifts <= 1:
        return [(0.5,) * d]
    return [tuple(map(float, x0)) for x0 in random_shifts(d, cfg.n_shifts, seed=cfg.shift_seed)]


def _run_chern(item: _Item):
    cfg = item.cfg
    d = cfg.model.build().d
    P = _projector(cfg, Geometry.torus(d, item.size), item.seed)
    res = local_cocycle(P, *([P] * d))
    values = {"chern": res.real, "gap": P.gap}
    resid = {"imag": res.residuals["imag"]}
    ref = _safe_oracle(cfg)
    if ref is not None:
        values["oracle"] = ref
        resid["oracle_error"] = abs(res.real - ref)
        values["within_tolerance"] = bool(resid["oracle_error"] < cfg.tolerance)
    return [({"L": item.size}, values, resid)]


def _safe_oracle(cfg):
    try:
        return _oracle_value(cfg)
    except (InvalidArgumentError, GapClosedError, NumericalInconsistencyError):
        return None


def _run_sigma12(item: _Item):
    cfg = item.cfg
    P = _projector(cfg, Geometry.torus(3, item.size), item.seed)
    res = weak_invariant_sigma12(P, tuple(cfg.directions))
    values = {"sigma12": res.real, "gap": P.gap}
    resid = {"imag": res.residuals["imag"]}
    ref = _safe_oracle(cfg)
    if ref is not None:
        values["oracle"] = ref
        resid["oracle_error"] = abs(res.real - ref)
        values["within_tolerance"] = bool(resid["oracle_error"] < cfg.tolerance)
    return [({"L": item.size, "directions": list(cfg.directions)}, values, resid)]


def _run_index(item: _Item):
    cfg = item.cfg
    d = cfg.model.build().d
    geom = Geometry.box(d, item.size)
    P = _projector(cfg, geom, item.seed)
    cl = build_clifford(d)
    out = []
    for x0 in _shifts(cfg, d):
        F = dirac_phase(geom, cl, x0, Q=P.Q)
        rec = fedosov_tindex(P, F, n=cfg.fedosov_n, interior_radius=cfg.interior_radius)
        values = {"index": rec.value, "gap": P.gap}
        if cfg.kernel:
            kf, kfd = kernel_dims(P, F, tol=cfg.kernel_tol, interior_radius=cfg.interior_radius)
            values.update(ker_f=kf, ker_f_dagger=kfd, kernel_index=kf - kfd)
        params = {"R": item.size, "interior_radius": rec.interior_radius, "x0": list(x0), "n": rec.n}
        out.append((params, values, {"imag": rec.imag_residual}))
    return out


def _run_decay(item: _Item):
    cfg = item.cfg
    d = cfg.model.build().d
    geom = Geometry.box(d, item.size)
    P = _projector(cfg, geom, item.seed)
    cl = build_clifford(d)
    out = []
    for x0 in _shifts(cfg, d):
        F = dirac_phase(geom, cl, x0, Q=P.Q)
        rec = summability_diagnostic(P, F, k=cfg.decay_k)
        values = {"slope": rec.slope, "target_slope": -float(cfg.decay_k), "gap": P.gap}
        params = {"R": item.size, "x0": list(x0), "k": rec.k}
        out.append((params, values, {}, rec))
    return out


def _run_convergence(item: _Item):
    """Fedosov index at box radius R over several windows, plus the local value on a torus of side 2R."""
    cfg = item.cfg
    d = cfg.model.build().d
    R = item.size
    geom = Geometry.box(d, R)
    P = _projector(cfg, geom, item.seed)
    cl = build_clifford(d)
    radii = cfg.interior_radii or sorted({max(1, R // 3), max(1, R // 2)})
    x0 = _shifts(cfg, d)[0]
    F = dirac_phase(geom, cl, x0, Q=P.Q)
    idx = {Rp: fedosov_tindex(P, F, n=cfg.fedosov_n, interior_radius=Rp).value for Rp in radii}
    Pt = _projector(cfg, Geometry.torus(d, 2 * R), item.seed)
    loc = local_cocycle(Pt, *([Pt] * d)).real
    out = []
    for Rp, v in idx.items():
        values = {"index": v, "local": loc, "route_gap": abs(v - loc)}
        params = {"R": R, "L": 2 * R, "interior_radius": Rp, "x0": list(x0)}
        out.append((params, values, {"window_spread": max(idx.values()) - min(idx.values())}))
    return out


def _run_identity(item: _Item):
    cfg = item.cfg
    d = cfg.dimension
    lhs, rhs = central_identity_check(d, item.extra["points"], cutoff=cfg.cutoff)
    rel = abs(lhs - rhs) / abs(rhs) if rhs != 0 else abs(lhs)
    values = {"lhs_real": lhs.real, "lhs_imag": lhs.imag, "rhs_real": rhs.real, "rhs_imag": rhs.imag,
              "within_tolerance": bool(rel < cfg.tolerance)}
    return [({"d": d, "cutoff": cfg.cutoff}, values, {"relative_error" if rhs != 0 else "absolute_error": rel})]


def _run_oracle(item: _Item):
    cfg = item.cfg
    model = cfg.model.build()
    c = _oracle_for(model, cfg.fermi_level, item.size)
    return [({"N": item.size}, {"chern": c}, {})]


RUNNERS = {
    "chern": _run_chern,
    "sigma12": _run_sigma12,
    "index": _run_index,
    "decay": _run_decay,
    "convergence": _run_convergence,
    "identity-check": _run_identity,
    "oracle": _run_oracle,
}


def expand(cfg: ExperimentConfig) -> list:
    if cfg.kind == "identity-check":
        pts = cfg.points if cfg.points is not None else DEFAULT_POINTS
        return [_Item(cfg, None, None, {"points": conf}) for conf in pts]
    if cfg.kind == "oracle":
        return [_Item(cfg, N, None) for N in cfg.sizes]
    clean = cfg.model.build().is_clean
    seeds = [None] if clean else cfg.seeds
    return [_Item(cfg, s, seed) for s in cfg.sizes for seed in seeds]


def experiment_id(cfg: ExperimentConfig) -> str:
    if cfg.experiment_id:
        return cfg.experiment_id
    name = cfg.model.name or "custom"
    return f"{cfg.kind}-{name}" if cfg.kind != "identity-check" else "identity-check"


def _execute(args):
    index, item, exp_id = args
    t0 = time.perf_counter()
    tables = []
    try:
        rows = RUNNERS[item.cfg.kind](item)
        recs = []
        for row in rows:
            params, values, resid = row[:3]
            if len(row) > 3:
                tables.append((index, len(tables), row[3]))
            recs.append(ResultRecord(exp_id, item.cfg.kind, index, _jsonable({**item.base_params(), **params}),
                                     _jsonable(values), _jsonable(resid)))
    except Exception as exc:  # noqa: BLE001 - recorded, sweep continues
        log.warning("item %d failed: %s", index, exc)
        err = {"type": type(exc).__name__, "message": str(exc)}
        if not isinstance(exc, (InvalidArgumentError, GapClosedError, RuntimeError)):
            err["traceback"] = traceback.format_exc(limit=4)
        recs = [ResultRecord(exp_id, item.cfg.kind, index, _jsonable(item.base_params()), status="error", error=err)]
        tables = []
    dt = time.perf_counter() - t0
    for r in recs:
        r.wall_time = dt
    return recs, tables


def run_experiment(cfg: ExperimentConfig, out_dir=None) -> list:
    """Run every sweep point of ``cfg``; write outputs to ``out_dir`` (or cfg.output) when given."""
    exp_id = experiment_id(cfg)
    items = expand(cfg)
    jobs = [(i, it, exp_id) for i, it in enumerate(items)]
    if cfg.threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            results = list(pool.map(_execute, jobs))  # map keeps submission order
    else:
        results = [_execute(j) for j in jobs]
    records = [r for recs, _ in results for r in recs]
    tables = [t for _, ts in results for t in ts]
    out_dir = out_dir if out_dir is not None else cfg.output
    if out_dir is not None:
        write_outputs(records, cfg, out_dir, decay_tables=tables)
    return records


# ---------------------------------------------------------------- output


def write_outputs(records, cfg: ExperimentConfig, out_dir, decay_tables=()):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    payload = {
        "schema_version": SCHEMA_VERSION,
        "config": _jsonable(cfg.to_dict()),
        "records": [r.to_dict() for r in records],
    }
    (out / "results.json").write_text(json.dumps(payload, indent=2, allow_nan=True) + "\n")

    rows = [r.flat() for r in records]
    extra = sorted({k for row in rows for k in row} - set(CSV_BASE_COLUMNS))
    with (out / "results.csv").open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=CSV_BASE_COLUMNS + extra, restval="")
        w.writeheader()
        for row in rows:
            w.writerow({k: _csv_cell(v) for k, v in row.items()})

    for item, j, rec in decay_tables:
        with (out / f"decay_item{item:03d}_{j:02d}.csv").open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["schema_version", "distance", "diag_norm"])
            for r, v in rec.rows():
                w.writerow([SCHEMA_VERSION, repr(r), repr(v)])
    return out


def _csv_cell(v):
    if isinstance(v, float):
        return repr(v) if math.isfinite(v) else str(v)
    if v is None:
        return ""
    return v


def read_results(path) -> list:
    data = json.loads(Path(path).read_text())
    if data.get("schema_version") != SCHEMA_VERSION:
        raise InvalidArgumentError(f"unsupported schema version {data.get('schema_version')}")
    return [ResultRecord.from_dict(r) for r in data["records"]]
