"""Benchmark harness: generate, solve, certify, write CSV."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field, fields

from .errors import MdarpError
from .generators import generate_instance
from .routing import empirical_ratio, lower_bounds, verify_solution
from .solve import solve


@dataclass
class BenchConfig:
    instances: list = field(default_factory=list)  # generator specs, each with a "seeds" list
    algorithms: list = field(default_factory=list)
    timing: bool = True
    max_states: int | None = None

    @classmethod
    def from_dict(cls, doc):
        return cls(instances=list(doc.get("instances", [])), algorithms=list(doc.get("algorithms", [])),
                   timing=bool(doc.get("timing", True)), max_states=doc.get("max_states"))

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass
class BenchRecord:
    instance_id: str
    n: int
    m: int
    h: int
    capacity: int
    algorithm: str
    weight: float | None = None
    flow_lb: float | None = None
    steiner_forest_lb: float | None = None
    mtsp_lb: float | None = None
    best_lb: float | None = None
    ratio: float | None = None
    opt_ratio: float | None = None
    runtime_ms: float | None = None
    seed: int | None = None
    feasible: bool | None = None
    certificate_ok: bool | None = None
    cert_violations: int = 0
    error: str = ""


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return f"{x:.9g}"
    return str(x)


def run_benchmark(config: BenchConfig):
    """One record per (instance, algorithm), in config order."""
    records = []
    for spec in config.instances:
        spec = dict(spec)
        seeds = spec.pop("seeds", [spec.pop("seed", 0)])
        kind = spec.pop("kind")
        for sd in seeds:
            inst = generate_instance(kind, seed=sd, **spec)
            iid = f"{kind}-n{inst.n}-m{inst.m}-h{inst.h}-c{inst.capacity}-s{sd}"
            lbs = lower_bounds(inst)
            rows = []
            for alg in config.algorithms:
                rec = BenchRecord(iid, inst.n, inst.m, inst.h, inst.capacity, alg, seed=sd,
                                  flow_lb=lbs.flow_lb, steiner_forest_lb=lbs.steiner_forest_lb,
                                  mtsp_lb=lbs.mtsp_lb, best_lb=lbs.best)
                try:
                    sol = solve(inst, alg, seed=sd, max_states=config.max_states,
                                with_bounds=False, timing=config.timing)
                except MdarpError as exc:
                    rec.error = f"{type(exc).__name__}: {exc}"
                    rows.append(rec)
                    continue
                rep = verify_solution(inst, sol)
                rec.weight = sol.weight
                rec.runtime_ms = sol.runtime_ms
                rec.feasible = rep.ok
                cert = sol.meta.get("certificate")
                if cert is not None:
                    rec.certificate_ok = bool(cert["ok"])
                    rec.cert_violations = 0 if cert["ok"] else 1
                rec.cert_violations += len(rep.breaches)
                try:
                    rec.ratio = empirical_ratio(sol, lbs)
                except MdarpError:
                    rec.ratio = None
                rows.append(rec)
            opt = next((r.weight for r in rows if r.algorithm == "exact" and r.weight is not None), None)
            if opt is not None:
                for r in rows:
                    if r.weight is not None:
                        r.opt_ratio = r.weight / opt if opt > 0 else (1.0 if r.weight == 0 else None)
            records.extend(rows)
    return records


def records_to_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    names = [f.name for f in fields(BenchRecord)]
    w.writerow(names)
    for r in records:
        d = asdict(r)
        w.writerow([_fmt(d[k]) for k in names])
    return buf.getvalue()
