"""Experiment drivers: controller comparison grid and sensor characterization.

Grid cells are independent simulations.  They can be farmed out to worker
processes; results are always reassembled in grid-index order, so the CSV
bytes do not depend on ``jobs``.
"""
import csv
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from decimal import ROUND_HALF_EVEN, Decimal
from itertools import product

import numpy as np

from . import config as C
from .control import ControllerKind
from .errors import OrthoglideError
from .sensors import EncoderConfig, calibrate_blur, characterize
from .simulator import PerturbationSpec, compute_metrics, run_simulation
from .trajectory import make_path

BASELINE = (ControllerKind.SINGLE_AXIS, "coarse")


def um(value):
    """Metres to micrometres, rounded half-to-even to 3 decimals, as text."""
    if value is None or not np.isfinite(value):
        return ""
    return str(Decimal(repr(float(value) * 1e6)).quantize(Decimal("0.001"), rounding=ROUND_HALF_EVEN))


def _pct(value):
    if value is None or not np.isfinite(value):
        return ""
    return str(Decimal(repr(float(value))).quantize(Decimal("0.01"), rounding=ROUND_HALF_EVEN))


@dataclass(frozen=True)
class Cell:
    controller: ControllerKind
    accuracy: str
    identification: str
    path: str
    latency: int

    @property
    def key(self):
        return (self.controller.value, self.accuracy, self.identification, self.path, self.latency)


@dataclass(frozen=True)
class Task:
    index: int
    cell: Cell
    replicate: int
    seed: int
    sim: object
    path_spec: object


@dataclass(frozen=True)
class RunRecord:
    index: int
    cell: Cell
    replicate: int
    seed: int
    status: str
    static: float = np.nan
    dynamic: float = np.nan
    max_error: float = np.nan


def grid_tasks(cp):
    """Every (cell, replicate) pair of the grid in canonical order."""
    ax = C.grid_axes(cp)
    seeds = C.seeds(ax["base_seed"], ax["replicates"])
    tasks = []
    cells = product(ax["controllers"], ax["accuracies"], ax["identifications"], ax["paths"],
                    ax["latencies"])
    for kind, acc, ident, (token, spec), lat in cells:
        cell = Cell(kind, acc, ident, token, lat)
        joint_res, vision_acc = C.ACCURACY_LEVELS[acc]
        geom_tol, dyn_tol = C.identification(ident)
        for r, seed in enumerate(seeds):
            sim = C.sim_config(cp, seed=seed, controller=kind,
                               encoder=EncoderConfig(joint_res),
                               vision=C.vision_config(cp, accuracy=vision_acc,
                                                      latency_periods=lat, seed=seed),
                               perturbation=PerturbationSpec(geom_tol, dyn_tol, seed))
            tasks.append(Task(len(tasks), cell, r, seed, sim, spec))
    return tasks


def run_task(task):
    try:
        path = make_path(task.path_spec, task.sim.true_params.geom)
        m = compute_metrics(run_simulation(task.sim, path))
    except OrthoglideError as exc:
        return RunRecord(task.index, task.cell, task.replicate, task.seed, type(exc).__name__)
    except np.linalg.LinAlgError:
        return RunRecord(task.index, task.cell, task.replicate, task.seed, "LinAlgError")
    return RunRecord(task.index, task.cell, task.replicate, task.seed, "ok",
                     m.static_accuracy, m.dynamic_accuracy, m.max_error)


def run_tasks(tasks, jobs=1):
    if jobs <= 1 or len(tasks) <= 1:
        records = [run_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(run_task, tasks, chunksize=1))
    return sorted(records, key=lambda r: r.index)


@dataclass(frozen=True)
class CellSummary:
    cell: Cell
    seeds: tuple
    ok: int
    static: float
    static_std: float
    dynamic: float
    dynamic_std: float
    max_error: float
    status: str
    static_improvement: float = np.nan
    dynamic_improvement: float = np.nan


def _std(x):
    return float(np.std(x, ddof=1)) if len(x) > 1 else 0.0


def summarize(records):
    """Aggregate replicates per cell (mean and sample std over successful
    runs) and add the improvement relative to the single-axis baseline."""
    groups = {}
    for r in records:
        groups.setdefault(r.cell.key, []).append(r)
    out = []
    for key, rs in groups.items():
        good = [r for r in rs if r.status == "ok"]
        if len(good) == len(rs):
            status = "ok"
        else:
            failed = sorted({r.status for r in rs if r.status != "ok"})
            status = ("partial:" if good else "failed:") + "|".join(failed)
        st = [r.static for r in good]
        dy = [r.dynamic for r in good]
        mx = [r.max_error for r in good]
        nan = float("nan")
        out.append(CellSummary(rs[0].cell, tuple(r.seed for r in rs), len(good),
                               float(np.mean(st)) if good else nan, _std(st) if good else nan,
                               float(np.mean(dy)) if good else nan, _std(dy) if good else nan,
                               float(np.max(mx)) if good else nan, status))
    by_key = {s.cell.key: s for s in out}
    final = []
    for s in out:
        c = s.cell
        base = by_key.get((BASELINE[0].value, BASELINE[1], c.identification, c.path, c.latency))
        si = di = np.nan
        if base is not None and base.ok and s.ok:
            si = 100.0 * (1.0 - s.static / base.static)
            di = 100.0 * (1.0 - s.dynamic / base.dynamic)
        final.append(replace(s, static_improvement=si, dynamic_improvement=di))
    return final


GRID_COLUMNS = ["controller", "accuracy", "joint_resolution_um", "vision_accuracy_um",
                "identification", "path", "latency_periods", "replicates", "ok_replicates",
                "seeds", "static_um", "static_std_um", "dynamic_um", "dynamic_std_um", "max_um",
                "static_improvement_pct", "dynamic_improvement_pct", "status"]

RUN_COLUMNS = ["index", "controller", "accuracy", "identification", "path", "latency_periods",
               "replicate", "seed", "status", "static_um", "dynamic_um", "max_um"]


def grid_csv(summaries):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(GRID_COLUMNS)
    for s in summaries:
        c = s.cell
        jr, va = C.ACCURACY_LEVELS[c.accuracy]
        w.writerow([c.controller.value, c.accuracy, um(jr), um(va), c.identification, c.path,
                    c.latency, len(s.seeds), s.ok, " ".join(map(str, s.seeds)),
                    um(s.static), um(s.static_std), um(s.dynamic), um(s.dynamic_std),
                    um(s.max_error), _pct(s.static_improvement), _pct(s.dynamic_improvement),
                    s.status])
    return buf.getvalue()


def runs_csv(records):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RUN_COLUMNS)
    for r in records:
        c = r.cell
        w.writerow([r.index, c.controller.value, c.accuracy, c.identification, c.path, c.latency,
                    r.replicate, r.seed, r.status, um(r.static), um(r.dynamic), um(r.max_error)])
    return buf.getvalue()


def run_grid(cp, jobs=1):
    """Run the grid described by ``cp``; returns ``(records, summaries)``."""
    records = run_tasks(grid_tasks(cp), jobs)
    return records, summarize(records)


# -- sensor characterization -------------------------------------------------

CHAR_COLUMNS = ["acceleration_mps2", "static_um", "dynamic_um", "blur_gain",
                "samples_rest", "samples_motion"]


def sensor_characterization(cp):
    spec, vision, mode, target, cal_accel = C.characterization(cp)
    if mode == "calibrate":
        vision = replace(vision, blur_gain=calibrate_blur(vision, target, cal_accel, spec))
    return characterize(vision, spec), vision


def characterization_csv(rows, vision):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CHAR_COLUMNS)
    for r in rows:
        w.writerow([f"{r.acceleration:g}", um(r.static_error), um(r.dynamic_error),
                    f"{vision.blur_gain:.17g}", r.samples_rest, r.samples_motion])
    return buf.getvalue()
