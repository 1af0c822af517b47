"""Grid sweeps over SNR, multiplexing gain or interferer strength, with CSV I/O.

A sweep row holds, for each requested (metric, mode) pair, a value and a
``_converged`` flag; Monte-Carlo metrics carry a standard-error column
instead. Cells whose series did not settle keep their raw partial value
with the flag set to ``false``; cells that could not be computed at all
hold ``nan``.

On the ``rf`` axis every node runs at ``rf * log2(1 + omega)`` bit/s/Hz,
so the outage and Monte-Carlo metrics are evaluated at the variable-rate
thresholds, and ``df_fixed`` is the frozen-rate slope at those thresholds.
"""

import csv
import enum
import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import diversity, montecarlo, outage
from .outage import Detector, Mode, NonConvergent, SeriesControl
from .scenario import ScenarioConfig, load_scenarios

__all__ = [
    "Axis",
    "Metric",
    "SweepMode",
    "SweepSpec",
    "SweepTable",
    "SweepError",
    "THREADS_ENV",
    "grid",
    "run_sweep",
    "emit_csv",
    "read_csv",
]

THREADS_ENV = "HBDLINK_THREADS"


class SweepError(ValueError):
    """An invalid sweep specification."""


class Axis(enum.Enum):
    OMEGA_DB = "omega_db"
    RF = "rf"
    ALPHA_12 = "alpha_12"


class Metric(enum.Enum):
    OUTAGE = "outage"
    DF_FIXED = "df_fixed"
    DF_VARIABLE = "df_variable"
    MC_OUTAGE = "mc_outage"


class SweepMode(enum.Enum):
    """Per-node modes plus the three system-level aggregates."""

    GS_HBD = "gs_hbd"
    AS2_II = "as2_ii"
    AS2_SIC = "as2_sic"
    GS_HD = "gs_hd"
    AS2_HD = "as2_hd"
    SYS_II = "sys_ii"
    SYS_SIC = "sys_sic"
    SYS_HD = "sys_hd"


_SYSTEM = {
    SweepMode.SYS_II: (Detector.II, (Mode.GS_HBD, Mode.AS2_II)),
    SweepMode.SYS_SIC: (Detector.SIC, (Mode.GS_HBD, Mode.AS2_SIC)),
    SweepMode.SYS_HD: (Detector.HD, (Mode.GS_HD, Mode.AS2_HD)),
}


@dataclass(frozen=True)
class SweepSpec:
    """One sweep: an axis range, the metrics and modes to tabulate.

    ``rf`` is the multiplexing gain used by ``df_variable`` on the
    ``omega_db`` and ``alpha_12`` axes. ``max_terms`` feeds the series
    truncation policy.
    """

    axis: Axis
    start: float
    stop: float
    step: float
    metrics: tuple
    modes: tuple
    output_path: str = ""
    samples: int = 1_000_000
    seed: int = 0
    rf: float = 0.5
    max_terms: int = 200

    def __post_init__(self):
        object.__setattr__(self, "axis", Axis(self.axis))
        object.__setattr__(self, "metrics", tuple(Metric(m) for m in self.metrics))
        object.__setattr__(self, "modes", tuple(SweepMode(m) for m in self.modes))
        if not self.start < self.stop:
            raise SweepError("start must be below stop")
        if not self.step > 0:
            raise SweepError("step must be > 0")
        if not self.metrics:
            raise SweepError("at least one metric is required")
        if not self.modes:
            raise SweepError("at least one mode is required")
        if self.samples < 1:
            raise SweepError("samples must be >= 1")
        if not 0.0 <= self.rf <= 1.0:
            raise SweepError("rf must lie in [0, 1]")
        if self.axis is Axis.RF and not (0.0 <= self.start and self.stop <= 1.0):
            raise SweepError("an rf axis must stay within [0, 1]")


@dataclass
class SweepTable:
    columns: list
    rows: list = field(default_factory=list)

    def column(self, name):
        idx = self.columns.index(name)
        return [row[idx] for row in self.rows]


def grid(start, stop, step):
    """Inclusive grid ``start, start+step, ...`` up to ``stop`` (rounding-safe)."""
    n = int(math.floor((stop - start) / step + 1e-9))
    return [round(start + i * step, 12) for i in range(n + 1)]


def _columns(spec):
    cols = ["axis"]
    for metric in spec.metrics:
        for mode in spec.modes:
            if metric is Metric.MC_OUTAGE:
                cols += ["mc_outage_%s" % mode.value, "mc_%s_se" % mode.value]
            else:
                cols += ["%s_%s" % (metric.value, mode.value),
                         "%s_%s_converged" % (metric.value, mode.value)]
    return cols


def _point_config(base, spec, x):
    if spec.axis is Axis.OMEGA_DB:
        return base.with_omega_db(x), spec.rf
    if spec.axis is Axis.ALPHA_12:
        return base.replace(alpha_12=x), spec.rf
    rate = x * math.log2(1.0 + base.omega_x)
    return base.replace(r1_hbd=rate, rgs_hbd=rate), x


def _cell(metric, mode, cfg, rf, ctl):
    """Return (value, converged) for one analytic cell."""
    try:
        if metric is Metric.OUTAGE:
            if mode in _SYSTEM:
                res = outage.outage_system(_SYSTEM[mode][0], cfg, ctl)
            else:
                res = outage.outage(Mode(mode.value), cfg, ctl)
            return res.probability, res.converged
        if mode in _SYSTEM:
            rate_mode = diversity.RateMode.FIXED if metric is Metric.DF_FIXED else diversity.RateMode.VARIABLE
            res = diversity.df_system(_SYSTEM[mode][0], rate_mode, cfg, rf, ctl)
        elif metric is Metric.DF_FIXED:
            res = diversity.df_fixed(Mode(mode.value), cfg, ctl)
        else:
            res = diversity.df_variable(Mode(mode.value), cfg, rf, ctl)
        return res.gain, True
    except NonConvergent as exc:
        partial = exc.result
        value = getattr(partial, "probability", None)
        if value is None:
            value = getattr(partial, "gain", float("nan"))
        return value, False
    except (ArithmeticError, ValueError):
        return float("nan"), False


def _analytic_row(args):
    base, spec, x = args
    cfg, rf = _point_config(base, spec, x)
    ctl = SeriesControl(max_terms=spec.max_terms)
    out = {}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", outage.DivergenceWarning)
        for metric in spec.metrics:
            if metric is Metric.MC_OUTAGE:
                continue
            for mode in spec.modes:
                out[(metric, mode)] = _cell(metric, mode, cfg, rf, ctl)
    return out


def _mc_columns(base, spec, xs):
    """Monte-Carlo estimates per (mode, row); one shared draw set per mode."""
    cfgs = [_point_config(base, spec, x)[0] for x in xs]
    per_mode = {}
    needed = set()
    for mode in spec.modes:
        needed.update(_SYSTEM[mode][1] if mode in _SYSTEM else (Mode(mode.value),))
    for m in needed:
        if m is Mode.AS2_SIC and not all(c.alpha_12 > 0 for c in cfgs):
            per_mode[m] = [None] * len(cfgs)
            continue
        per_mode[m] = montecarlo.mc_outage_sweep(m, cfgs, spec.samples, spec.seed)
    out = {}
    for mode in spec.modes:
        parts = _SYSTEM[mode][1] if mode in _SYSTEM else (Mode(mode.value),)
        for i in range(len(cfgs)):
            ests = [per_mode[p][i] for p in parts]
            if any(e is None for e in ests):
                out[(mode, i)] = (float("nan"), float("nan"))
                continue
            worst = max(ests, key=lambda e: e.probability)
            out[(mode, i)] = (worst.probability, worst.std_error)
    return out


def _threads():
    raw = os.environ.get(THREADS_ENV, "")
    if raw.strip():
        try:
            return max(1, int(raw))
        except ValueError:
            raise SweepError("%s must be an integer, got %r" % (THREADS_ENV, raw)) from None
    return os.cpu_count() or 1


def run_sweep(scenario, spec, variant=None):
    """Evaluate every requested (metric, mode) at every grid point.

    ``scenario`` is a :class:`ScenarioConfig` or a scenario-file path; a file
    with several variants needs ``variant``. Rows come back in axis order
    whatever order the worker processes finish in.
    """
    if isinstance(scenario, ScenarioConfig):
        base = scenario
    else:
        variants = load_scenarios(scenario)
        if variant is None:
            if len(variants) != 1:
                raise SweepError("%s has variants %s; pick one" % (scenario, sorted(variants)))
            base = next(iter(variants.values()))
        else:
            if variant not in variants:
                raise SweepError("no variant %r in %s" % (variant, scenario))
            base = variants[variant]
    xs = grid(spec.start, spec.stop, spec.step)
    jobs = [(base, spec, x) for x in xs]
    workers = min(_threads(), len(jobs))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            analytic = list(pool.map(_analytic_row, jobs))
    else:
        analytic = [_analytic_row(j) for j in jobs]
    mc = _mc_columns(base, spec, xs) if Metric.MC_OUTAGE in spec.metrics else {}
    table = SweepTable(columns=_columns(spec))
    for i, x in enumerate(xs):
        row = [x]
        for metric in spec.metrics:
            for mode in spec.modes:
                if metric is Metric.MC_OUTAGE:
                    row += list(mc[(mode, i)])
                else:
                    value, ok = analytic[i][(metric, mode)]
                    row += [value, ok]
        table.rows.append(row)
    return table


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    return "%.12g" % v


def emit_csv(table, path):
    """Write ``table`` as CSV: 12 significant digits, ``true``/``false`` flags."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(table.columns)
        for row in table.rows:
            writer.writerow([_fmt(v) for v in row])


def _parse(text):
    if text == "true":
        return True
    if text == "false":
        return False
    return float(text)


def read_csv(path):
    """Inverse of :func:`emit_csv`."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        columns = next(reader)
        rows = [[_parse(v) for v in row] for row in reader]
    return SweepTable(columns=columns, rows=rows)
