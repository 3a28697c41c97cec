"""
Sweeps of the joint calibration over strike grids: full (K1, K2) surfaces
and smile slices at a fixed second strike.
"""
from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .bs_core import OptionKind
from .calibrate import SolverConfig, implied_pair
from .errors import CalibrationError
from .mixture import MixtureModel, quote_pair

CSV_HEADER = ("k1", "k2", "sigma_imp", "rho_imp", "status", "iterations", "residual1",
              "residual2")
STATUSES = ("converged", "no_root", "multiple_roots", "degenerate", "inner_failure")
WORKERS_ENV = "IMPLIEDPAIR_WORKERS"


@dataclass(frozen=True)
class CellResult:
    k1: float
    k2: float
    sigma_imp: float
    rho_imp: float
    status: str
    iterations: int
    residual1: float
    residual2: float

    @property
    def converged(self) -> bool:
        return self.status == "converged"

    def row(self) -> list[str]:
        return [repr(float(self.k1)), repr(float(self.k2)), repr(float(self.sigma_imp)),
                repr(float(self.rho_imp)), self.status, str(int(self.iterations)),
                repr(float(self.residual1)), repr(float(self.residual2))]


def _is_degenerate(k1, k2):
    return abs(k1 - k2) < 1e-6 * abs(k2)


def solve_cell(model: MixtureModel, k1: float, k2: float, cfg: Optional[SolverConfig] = None,
               kind: Union[OptionKind, str] = OptionKind.CALL) -> CellResult:
    """Calibrate one grid cell; failures become statuses, never exceptions."""
    k1, k2 = float(k1), float(k2)
    nan = math.nan
    if _is_degenerate(k1, k2):
        return CellResult(k1, k2, nan, nan, "degenerate", 0, nan, nan)
    q1, q2 = quote_pair(model, kind, k1, k2)
    try:
        res = implied_pair(q1, q2, model.spot, cfg)
    except CalibrationError as exc:
        return CellResult(k1, k2, nan, nan, exc.status, 0, nan, nan)
    return CellResult(k1, k2, res.sigma_imp, res.rho_imp, "converged", res.iterations,
                      res.residuals[0], res.residuals[1])


def _solve_cell_args(args):
    return solve_cell(*args)


def _map_cells(tasks, workers):
    if workers is None:
        workers = int(os.environ.get(WORKERS_ENV, "1") or 1)
    if workers <= 1 or len(tasks) < 2:
        return [_solve_cell_args(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        # map preserves submission order, so output is independent of scheduling
        return list(pool.map(_solve_cell_args, tasks, chunksize=max(1, len(tasks) // (4 * workers))))


def _axis(values, name):
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"{name} must be a non-empty 1-D grid")
    if np.any(np.diff(arr) <= 0):
        raise ValueError(f"{name} must be strictly increasing")
    if np.any(arr <= 0):
        raise ValueError(f"{name} must contain positive strikes")
    return arr


@dataclass
class SurfaceGrid:
    k1_axis: np.ndarray
    k2_axis: np.ndarray
    sigma_surface: np.ndarray
    rho_surface: np.ndarray
    status_surface: np.ndarray
    cells: list

    def rows(self) -> list[CellResult]:
        return sorted(self.cells, key=lambda c: (c.k1, c.k2))

    @property
    def converged_fraction(self) -> float:
        live = [c for c in self.cells if c.status != "degenerate"]
        return sum(c.converged for c in live) / len(live) if live else 0.0

    def to_csv(self, path: Union[str, Path, None] = None) -> str:
        return write_csv(self.rows(), path)


def implied_surface(model: MixtureModel, k1_axis: Sequence[float], k2_axis: Sequence[float],
                    cfg: Optional[SolverConfig] = None,
                    workers: Optional[int] = None) -> SurfaceGrid:
    """Calibrate every off-diagonal ``(K1, K2)`` cell of the grid.

    ``workers`` > 1 spreads cells over processes; results do not depend on it.
    The default comes from the IMPLIEDPAIR_WORKERS environment variable.
    """
    k1s, k2s = _axis(k1_axis, "k1_axis"), _axis(k2_axis, "k2_axis")
    tasks = [(model, a, b, cfg) for a in k1s for b in k2s]
    cells = _map_cells(tasks, workers)
    shape = (k1s.size, k2s.size)
    sigma = np.array([c.sigma_imp for c in cells]).reshape(shape)
    rho = np.array([c.rho_imp for c in cells]).reshape(shape)
    status = np.array([c.status for c in cells], dtype=object).reshape(shape)
    return SurfaceGrid(k1s, k2s, sigma, rho, status, cells)


def smile_slice(model: MixtureModel, k1_axis: Sequence[float], k2_fixed: float,
                cfg: Optional[SolverConfig] = None,
                workers: Optional[int] = None) -> list[CellResult]:
    """Implied pair as a function of ``K1`` at a fixed ``K2``, one calibration per strike."""
    k1s = _axis(k1_axis, "k1_axis")
    return _map_cells([(model, a, float(k2_fixed), cfg) for a in k1s], workers)


def write_csv(cells: Sequence[CellResult], path: Union[str, Path, None] = None) -> str:
    """Long-form CSV with the fixed header; returns the text and writes it if ``path`` is given."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for c in sorted(cells, key=lambda c: (c.k1, c.k2)):
        w.writerow(c.row())
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def read_csv(source: Union[str, Path]) -> list[CellResult]:
    with open(source, newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != CSV_HEADER:
            raise ValueError(f"unexpected CSV header {header}")
        return [CellResult(float(r[0]), float(r[1]), float(r[2]), float(r[3]), r[4], int(r[5]),
                           float(r[6]), float(r[7])) for r in reader]


def parse_range(text: str) -> np.ndarray:
    """``"start:stop:step"`` with ``stop`` included, rounded to the step's decimals."""
    try:
        start, stop, step = (float(t) for t in text.split(":"))
    except ValueError:
        raise ValueError(f"range must look like start:stop:step, got {text!r}") from None
    if step <= 0 or stop < start:
        raise ValueError(f"empty or reversed range {text!r}")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    decimals = max(0, -int(math.floor(math.log10(step))) + 6)
    return np.round(start + step * np.arange(n), decimals)
