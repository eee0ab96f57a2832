"""Dataset generation: run the cross-product of parameter axes over a base scenario.

Sweep file (``key = value`` lines)::

    base = healthy.cfg                # path relative to the sweep file
    seed = 0                          # reserved for stochastic axes; unused
    max_scenarios = 10000
    workers = 1
    id_prefix = ds                    # defaults to the base scenario_id
    case.healthy =
    case.fault3 = fault.kind=static_ecc; fault.tooth=7; fault.e_mm=0.1
    axis.timebase.omega_rad_s = 50.27, 100.0

Cases (override bundles) form the outermost axis; ``axis.*`` lines follow in
file order with the last one varying fastest.
"""

from __future__ import annotations

import csv
import io
import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .config import ScenarioConfig
from .errors import ConfigError, ScenarioError
from .faults import NONE
from .pipeline import run_scenario

DEFAULT_MAX_SCENARIOS = 10_000


@dataclass
class SweepSpec:
    base: ScenarioConfig
    axes: list = field(default_factory=list)  # [(key, [value text, ...])]
    cases: list = field(default_factory=list)  # [(label, [override, ...])]
    seed: int = 0
    max_scenarios: int = DEFAULT_MAX_SCENARIOS
    workers: int = 1
    id_prefix: str | None = None

    @classmethod
    def parse(cls, text: str, base_dir=".", source: str = "<sweep>") -> "SweepSpec":
        settings = {}
        axes, cases = [], []
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            where = f"{source}:{lineno}: "
            if "=" not in line:
                raise ConfigError(f"{where}expected 'key = value'")
            key, value = (p.strip() for p in line.split("=", 1))
            if key.startswith("axis."):
                values = [v.strip() for v in value.split(",") if v.strip()]
                if not values:
                    raise ConfigError(f"{where}axis {key[5:]!r} has no values")
                if any(k == key[5:] for k, _ in axes):
                    raise ConfigError(f"{where}duplicate axis {key[5:]!r}")
                axes.append((key[5:], values))
            elif key.startswith("case."):
                label = key[5:]
                if not label or any(lbl == label for lbl, _ in cases):
                    raise ConfigError(f"{where}empty or duplicate case label {label!r}")
                cases.append((label, [o.strip() for o in value.split(";") if o.strip()]))
            elif key in ("base", "seed", "max_scenarios", "workers", "id_prefix"):
                if key in settings:
                    raise ConfigError(f"{where}duplicate key {key!r}")
                settings[key] = value
            else:
                raise ConfigError(f"{where}unknown sweep key {key!r}")
        if "base" not in settings:
            raise ConfigError(f"{source}: missing 'base = <scenario config>'")
        base = ScenarioConfig.load(Path(base_dir) / settings["base"])
        try:
            seed = int(settings.get("seed", 0))
            cap = int(settings.get("max_scenarios", DEFAULT_MAX_SCENARIOS))
            workers = int(settings.get("workers", 1))
        except ValueError as exc:
            raise ConfigError(f"{source}: {exc}") from None
        return cls(base, axes, cases, seed, cap, workers, settings.get("id_prefix"))

    @classmethod
    def load(cls, path) -> "SweepSpec":
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read sweep file {path}: {exc}") from None
        return cls.parse(text, path.parent, str(path))

    @property
    def size(self) -> int:
        n = max(1, len(self.cases))
        for _, values in self.axes:
            n *= len(values)
        return n

    def expand(self):
        """Yield ``(scenario_id, {column: value}, ScenarioConfig)`` in cross-product order."""
        if self.max_scenarios < 1:
            raise ConfigError(f"max_scenarios must be >= 1, got {self.max_scenarios}")
        if self.size > self.max_scenarios:
            raise ConfigError(f"sweep has {self.size} scenarios, above the cap of {self.max_scenarios}")
        prefix = self.id_prefix or self.base.scenario_id
        cases = self.cases or [(None, [])]
        keys = [k for k, _ in self.axes]
        grids = [v for _, v in self.axes]
        for idx, (case, combo) in enumerate(itertools.product(cases, itertools.product(*grids))):
            label, overrides = case
            sid = f"{prefix}_{idx:04d}"
            columns = {} if label is None else {"case": label}
            columns.update(zip(keys, combo))
            cfg = self.base.with_overrides(list(overrides) + [f"{k}={v}" for k, v in zip(keys, combo)])
            cfg.values["scenario_id"] = sid
            yield sid, columns, cfg


MANIFEST_TAIL = ("fault_labels", "status", "aape_deg", "mpe_deg", "wave_path", "metrics_path",
                 "profiles_path", "error")


def _run_one(job):
    sid, config_text, out_dir = job
    row = {"scenario_id": sid}
    try:
        cfg = ScenarioConfig.parse(config_text, sid)
        row["fault_labels"] = ";".join(f.label for f in cfg.fault_specs() if f.kind != NONE) or "healthy"
        res = run_scenario(cfg, out_dir)
    except (ScenarioError, ConfigError, ValueError) as exc:
        row.update(status="error", error=str(exc))
        return row
    row.update(
        status="ok",
        aape_deg=repr(res.metrics.aape),
        mpe_deg=repr(res.metrics.mpe),
        wave_path=Path(res.paths["wave"]).relative_to(out_dir).as_posix(),
        metrics_path=Path(res.paths["metrics"]).relative_to(out_dir).as_posix(),
        profiles_path=Path(res.paths["profiles"]).relative_to(out_dir).as_posix(),
        error="",
    )
    return row


def run_sweep(spec: SweepSpec, out_dir, workers: int | None = None) -> tuple[Path, list]:
    """Run every scenario and write ``manifest.csv``; returns its path and the rows.

    Rows appear in cross-product order whatever the worker count. A failed
    scenario yields an ``error`` row and does not stop the others.
    """
    out_dir = Path(out_dir)
    workers = spec.workers if workers is None else workers
    if workers < 1:
        raise ConfigError(f"workers must be >= 1, got {workers}")
    expanded = list(spec.expand())
    out_dir.mkdir(parents=True, exist_ok=True)
    jobs = [(sid, cfg.emit(), out_dir) for sid, _, cfg in expanded]
    if workers == 1 or len(jobs) == 1:
        results = [_run_one(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            results = list(pool.map(_run_one, jobs))

    axis_cols = (["case"] if spec.cases else []) + [k for k, _ in spec.axes]
    header = ["scenario_id"] + axis_cols + list(MANIFEST_TAIL)
    rows = []
    for (sid, columns, _), result in zip(expanded, results):
        row = dict.fromkeys(header, "")
        row.update(columns)
        row.update(result)
        rows.append(row)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=header, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    manifest = out_dir / "manifest.csv"
    manifest.write_text(buf.getvalue())
    return manifest, rows
