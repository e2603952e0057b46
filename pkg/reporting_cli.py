#!/usr/bin/env python3
"""
Command-line front end: noise-threshold table, witness evaluation, the
biseparability oracle, measurement settings, sampling, noise sweeps,
certificates and graph DOT output.

Usage:
    python reporting_cli.py table1 --n-min 2 --n-max 5 --format json
    python reporting_cli.py eval --state rhoprime --witness wtilde --detect
    python reporting_cli.py eval --state he:n=2 --witness w3 --noise 0.375 --shots 100000
    python reporting_cli.py oracle --n 2 --method search --seed 7
    python reporting_cli.py settings --witness wtilde --n 2
    python reporting_cli.py sample --state he:n=2 --witness w1 --shots 1000 --out records.jsonl
    python reporting_cli.py eval --n 2 --witness w1 --records records.jsonl
    python reporting_cli.py sweep --witness w1 --n 2 --p-values 0,0.25,0.5
    python reporting_cli.py certify --witness w3 --n 3 --alpha 1 --c0 2
    python reporting_cli.py dot --graph ring5

Exit codes: 0 success, 2 invalid input, 3 capacity exceeded, 4 internal
consistency failure.
"""

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Sequence, Tuple

from pydantic import BaseModel, Field, ValidationError

import config
from errors import ConsistencyError, DomainError, ResolutionError, WitnessLabError
from measurement_sim import SampleRecord, decompose, estimate, read_records, sample_all, sampled_negative
from separability_oracle import (
    BOUND,
    BOUND_TOL,
    enumerate_partitions,
    max_overlap_svd,
    qudit_overlap_bound,
    search_family,
    verify_appendix_bound,
)
from state_engine import GraphSpec, State, SystemSpec, add_white_noise, build_he_state, resolve_state
from witness_factory import (
    TABLE_KINDS,
    certify_witness,
    closed_form_trace,
    detect_hyperentanglement,
    expectation,
    noise_sweep,
    noise_threshold,
    noisy_expectation,
    parse_witness,
    table_threshold_printed,
    threshold_discrepancy,
    trace_report,
)

log = logging.getLogger("reporting_cli")

SETTINGS_COUNT_MAX_QUBITS = 12


# ─────────────────────────────── MODELS ────────────────────────────── #

class ReportRow(BaseModel):
    """One (witness, N) row of the noise-threshold table"""

    kind: str
    N: int
    D: int
    system: str
    trace: str
    trace_float: float
    p_max: str
    p_max_float: float
    p_max_printed: Optional[str] = None
    p_max_printed_float: Optional[float] = None
    settings_count: Optional[int] = None
    notes: str = ""


class RunConfig(BaseModel):
    """Validated command-line arguments of one run"""

    command: Literal["table1", "eval", "oracle", "settings", "sample", "sweep", "certify", "dot"]
    state: Optional[str] = None
    witness: Optional[str] = None
    p_noise: float = Field(0.0, ge=0, le=1)
    shots: int = Field(0, ge=0)
    seed: int = config.DEFAULT_SEED
    format: Literal["text", "json", "csv"] = "text"
    n: Optional[int] = Field(None, gt=0)
    graph: Optional[str] = None
    n_min: int = Field(1, gt=0)
    n_max: int = Field(5, gt=0)
    method: Literal["svd", "search"] = "svd"
    restarts: int = Field(config.SEARCH_RESTARTS, gt=0)
    alpha: str = "1"
    c0: int = 2
    detect: bool = False
    records: Optional[str] = None
    p_values: Optional[str] = None
    out: Optional[str] = None

    def system(self) -> SystemSpec:
        if self.n is None and not self.graph:
            raise ResolutionError(f"{self.command} needs --n or --graph")
        return SystemSpec.parse(self.n, self.graph)

    def resolve(self) -> Tuple[Optional[State], Optional[SystemSpec], Any]:
        """Resolve state, system and witness identifiers before any work."""
        state, system, witness = None, None, None
        if self.state:
            state, system = resolve_state(self.state)
        elif self.n is not None or self.graph:
            system = self.system()
        if self.witness:
            if system is None:
                raise ResolutionError("a witness needs --state, --n or --graph")
            witness = parse_witness(self.witness, system, c0=self.c0)
        return state, system, witness


class Report(BaseModel):
    """Versioned output document shared by every command"""

    schema_id: str = config.REPORT_SCHEMA
    command: str
    params: Dict[str, Any] = {}
    rows: List[Dict[str, Any]] = []
    summary: Dict[str, Any] = {}
    notes: List[str] = []

    def to_dict(self) -> Dict[str, Any]:
        return {
            "schema": self.schema_id,
            "command": self.command,
            "params": self.params,
            "rows": self.rows,
            "summary": self.summary,
            "notes": self.notes,
        }


# ────────────────────────────── COMMANDS ───────────────────────────── #

def table_row(system: SystemSpec, kind: str) -> ReportRow:
    witness = parse_witness(kind, system)
    checked = trace_report(witness)
    trace_value = closed_form_trace(witness)
    p_max = noise_threshold(witness)
    printed = table_threshold_printed(witness)
    settings_count = None
    if system.n_qubits <= SETTINGS_COUNT_MAX_QUBITS:
        settings_count = decompose(witness).emitted_count
    note = threshold_discrepancy(witness) or ""
    if checked.bitstring_sum is None:
        note = (note + "; " if note else "") + "bit-string sum skipped above scan cap"
    return ReportRow(
        kind=witness.display_name(),
        N=system.n_qubits,
        D=system.dim,
        system=system.label(),
        trace=str(trace_value),
        trace_float=float(trace_value),
        p_max=str(p_max),
        p_max_float=float(p_max),
        p_max_printed=None if printed is None else str(printed),
        p_max_printed_float=None if printed is None else float(printed),
        settings_count=settings_count,
        notes=note,
    )


def cmd_table1(n_min: int, n_max: int) -> Report:
    """Rows for N = 2n (HE) and N = 2n+1 (path graph), n_min <= n <= n_max."""
    if n_min < 1 or n_max < n_min:
        raise DomainError(f"invalid range n_min={n_min}, n_max={n_max}")
    if 2 * n_max + 1 > config.DIAGONAL_SCAN_CAP:
        log.warning(f"N={2 * n_max + 1} exceeds the scan cap; bit-string sums are skipped there")
    rows: List[ReportRow] = []
    for n in range(n_min, n_max + 1):
        for system in (SystemSpec.he(n), SystemSpec.of_graph(GraphSpec.path(2 * n + 1))):
            rows.extend(table_row(system, kind) for kind in TABLE_KINDS)
    notes = sorted({f"{r.kind} N={r.N}: {r.notes}" for r in rows if r.notes})
    return Report(
        command="table1",
        params={"n_min": n_min, "n_max": n_max},
        rows=[r.model_dump() for r in rows],
        summary={"rows": len(rows), "discrepancies": sum(1 for r in rows if r.p_max_printed not in (None, r.p_max))},
        notes=notes,
    )


def cmd_eval(cfg: RunConfig) -> Report:
    state, system, witness = cfg.resolve()
    if witness is None:
        raise ResolutionError("eval needs --witness")
    row: Dict[str, Any] = {"witness": witness.identifier, "state": cfg.state, "p_noise": cfg.p_noise}
    summary: Dict[str, Any] = {}
    notes: List[str] = []

    rho = None
    if state is not None:
        rho = add_white_noise(state, cfg.p_noise) if cfg.p_noise > 0 else state
        value = expectation(witness, rho)
        row["exact"] = value
        if cfg.state.split(":")[0].lower() in ("he", "graph"):
            closed = noisy_expectation(witness, cfg.p_noise)
            if abs(float(closed) - value) > 1e-9:
                raise ConsistencyError(f"closed form {closed} disagrees with dense value {value}")
            row["exact_closed_form"] = str(closed)
    elif not cfg.records:
        raise ResolutionError("eval needs --state or --records")

    records: Optional[List[SampleRecord]] = None
    if cfg.records:
        with open(cfg.records, encoding="utf-8") as fh:
            records = read_records(fh)
        notes.append(f"estimate from {len(records)} records in {cfg.records}")
    elif cfg.shots > 0:
        records = sample_all(rho, decompose(witness), cfg.shots, cfg.seed)
        summary["rng"] = config.RNG_ALGORITHM
        summary["seed"] = cfg.seed
    if records is not None:
        est = estimate(witness, records)
        row.update(estimate=est.value, stderr=est.stderr, shots_total=est.shots_total,
                   settings=est.settings_used)
        summary["sampled_negative"] = sampled_negative(est)

    if cfg.detect:
        if rho is None:
            raise ResolutionError("--detect needs --state")
        report = detect_hyperentanglement(rho, witness)
        row.update(per_dof=report.per_dof, verdict=report.verdict)
        summary["verdict"] = report.verdict
    return Report(
        command="eval",
        params={"state": cfg.state, "witness": cfg.witness, "p_noise": cfg.p_noise, "shots": cfg.shots,
                "seed": cfg.seed, "records": cfg.records},
        rows=[row],
        summary=summary,
        notes=notes,
    )


def cmd_oracle(n: int, method: str = "svd", restarts: Optional[int] = None, seed: int = config.DEFAULT_SEED) -> Report:
    restarts = config.SEARCH_RESTARTS if restarts is None else restarts
    if method == "svd":
        result = verify_appendix_bound(n)
        rows = [r.model_dump(exclude={"iterations"}) for r in result.rows]
    elif method == "search":
        result = search_family(n, restarts, seed)
        target = build_he_state(n)
        exact = [max_overlap_svd(target, p) for p in enumerate_partitions(n)]
        rows = []
        for r, svd in zip(result.rows, exact):
            if r.max_overlap_sq > svd + BOUND_TOL:
                raise ConsistencyError(f"search exceeds SVD on {r.partition}: {r.max_overlap_sq} > {svd}")
            rows.append({**r.model_dump(), "svd": svd})
    else:
        raise DomainError(f"unknown oracle method {method!r}")
    qudit = qudit_overlap_bound(n)
    summary = {
        "method": method,
        "max_overlap_sq": result.max_overlap_sq,
        "argmax_partition": result.argmax_partition.label(),
        "bound": BOUND,
        "families": len(rows),
        "qudit_overlap_sq": qudit,
    }
    if result.saturating_overlap_sq is not None:
        summary["saturating_overlap_sq"] = result.saturating_overlap_sq
    if method == "search":
        summary.update(restarts=restarts, seed=seed, iterations=result.iterations)
    return Report(
        command="oracle",
        params={"n": n, "method": method},
        rows=rows,
        summary=summary,
        notes=["mixtures inherit the pure-state bound: the overlap is linear in the state"],
    )


def cmd_settings(witness_id: str, system: SystemSpec) -> Report:
    witness = parse_witness(witness_id, system)
    dec = decompose(witness)
    rows = [
        {"index": i, "setting": g.setting.bases, "terms": len(g.terms), "uses_y": g.setting.uses_y}
        for i, g in enumerate(dec.groups)
    ]
    summary = {
        "emitted": dec.emitted_count,
        "xz_settings": dec.xz_count,
        "naive": dec.naive_count,
        "terms": dec.n_terms,
        "constant": dec.constant,
    }
    notes = []
    if dec.xz_count != dec.emitted_count:
        notes.append("products of XX and ZZ on one DOF equal -YY and need a Y-basis setting")
    return Report(command="settings", params={"witness": witness_id, "system": system.label()},
                  rows=rows, summary=summary, notes=notes)


def cmd_sample(cfg: RunConfig) -> List[SampleRecord]:
    state, _, witness = cfg.resolve()
    if state is None or witness is None:
        raise ResolutionError("sample needs --state and --witness")
    if cfg.shots <= 0:
        raise DomainError("sample needs --shots > 0")
    rho = add_white_noise(state, cfg.p_noise) if cfg.p_noise > 0 else state
    return sample_all(rho, decompose(witness), cfg.shots, cfg.seed)


def cmd_sweep(cfg: RunConfig) -> Report:
    _, system, witness = cfg.resolve()
    if witness is None:
        raise ResolutionError("sweep needs --witness")
    p_values = (cfg.p_values or "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1").split(",")
    dense = system.n_qubits <= min(8, config.DENSE_DENSITY_CAP)
    points = noise_sweep(witness, [p.strip() for p in p_values], dense=dense)
    p_max = noise_threshold(witness)
    return Report(
        command="sweep",
        params={"witness": witness.identifier, "system": system.label(), "p_values": cfg.p_values},
        rows=[p.model_dump() for p in points],
        summary={"p_max": str(p_max), "p_max_float": float(p_max)},
    )


def cmd_certify(cfg: RunConfig) -> Report:
    _, _, witness = cfg.resolve()
    if witness is None:
        raise ResolutionError("certify needs --witness")
    cert = certify_witness(witness, cfg.alpha)
    return Report(
        command="certify",
        params={"witness": witness.identifier, "system": witness.system.label(), "alpha": cfg.alpha, "c0": cfg.c0},
        rows=[cert.model_dump()],
        summary={"valid": cert.valid, "min_value": cert.min_value, "argmin": cert.argmin},
    )


# ─────────────────────────────── OUTPUT ────────────────────────────── #

def _cell(value: Any) -> Any:
    if isinstance(value, (list, tuple)):
        return ";".join(str(v) for v in value)
    return "" if value is None else value


def render(report: Report, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"
    rows = report.rows or [report.summary]
    header: List[str] = []
    for row in rows:
        header += [k for k in row if k not in header]
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=header)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _cell(row.get(k)) for k in header})
        return buf.getvalue()
    cells = [[str(_cell(row.get(k))) for k in header] for row in rows]
    widths = [max(len(h), *(len(c[i]) for c in cells)) for i, h in enumerate(header)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths))]
    lines += ["  ".join(c.ljust(w) for c, w in zip(line, widths)) for line in cells]
    if report.rows and report.summary:
        lines.append("")
        lines += [f"{k}: {v}" for k, v in sorted(report.summary.items())]
    lines += [f"note: {note}" for note in report.notes]
    return "\n".join(lines) + "\n"


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
        log.info(f"Wrote {out}")
    else:
        sys.stdout.write(text)


# ──────────────────────────────── CLI ──────────────────────────────── #

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, help="number of DOFs of the HE system")
    common.add_argument("--graph", help="graph preset (path4, star5, ring6) or edge list 0-1,1-2")
    common.add_argument("--witness", help="wtilde, w1, w2, w3, wj:J, wjalt:J, qudit")
    common.add_argument("--state", help="he:n=2, graph:path4, psi1, psi2, rhoprime, saturating:n=3,j=1")
    common.add_argument("--noise", type=float, default=0.0, dest="p_noise", help="white-noise fraction p")
    common.add_argument("--shots", type=int, default=0, help="shots per setting (0: exact only)")
    common.add_argument("--seed", type=int, default=config.DEFAULT_SEED)
    common.add_argument("--format", choices=("text", "json", "csv"), default="text")
    common.add_argument("--out", help="write the report to this file instead of stdout")

    ap = argparse.ArgumentParser(description="Hyperentanglement and graph-state witness toolkit.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("table1", parents=[common], help="traces and noise thresholds per witness and N")
    p.add_argument("--n-min", type=int, default=1)
    p.add_argument("--n-max", type=int, default=5)

    p = sub.add_parser("eval", parents=[common], help="expectation, sampled estimate and detection verdict")
    p.add_argument("--detect", action="store_true")
    p.add_argument("--records", help="JSON-lines sample records to estimate from")
    p.add_argument("--c0", type=int, default=2)

    p = sub.add_parser("oracle", parents=[common], help="biseparable overlap bound")
    p.add_argument("--method", choices=("svd", "search"), default="svd")
    p.add_argument("--restarts", type=int, default=config.SEARCH_RESTARTS)

    sub.add_parser("settings", parents=[common], help="local measurement settings of a witness")
    sub.add_parser("sample", parents=[common], help="JSON-lines sample records for every setting")

    p = sub.add_parser("sweep", parents=[common], help="expectation along a noise grid")
    p.add_argument("--p-values", help="comma-separated noise fractions")
    p.add_argument("--c0", type=int, default=2)

    p = sub.add_parser("certify", parents=[common], help="positivity of W - alpha Wtilde")
    p.add_argument("--alpha", default="1", help="positive rational, e.g. 1 or 3/2")
    p.add_argument("--c0", type=int, default=2)

    sub.add_parser("dot", parents=[common], help="graph in DOT format")
    return ap


def execute(cfg: RunConfig) -> str:
    """Run one command and return its rendered output."""
    if cfg.command == "table1":
        return render(cmd_table1(cfg.n_min, cfg.n_max), cfg.format)
    if cfg.command == "eval":
        return render(cmd_eval(cfg), cfg.format)
    if cfg.command == "oracle":
        if cfg.n is None:
            raise ResolutionError("oracle needs --n")
        return render(cmd_oracle(cfg.n, cfg.method, cfg.restarts, cfg.seed), cfg.format)
    if cfg.command == "settings":
        if not cfg.witness:
            raise ResolutionError("settings needs --witness")
        return render(cmd_settings(cfg.witness, cfg.system()), cfg.format)
    if cfg.command == "sample":
        return "".join(r.to_json_line() + "\n" for r in cmd_sample(cfg))
    if cfg.command == "sweep":
        return render(cmd_sweep(cfg), cfg.format)
    if cfg.command == "certify":
        return render(cmd_certify(cfg), cfg.format)
    if not cfg.graph:
        raise ResolutionError("dot needs --graph")
    return GraphSpec.parse(cfg.graph).to_dot()


def run(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(level=config.LOG_LEVEL, format=config.LOG_FORMAT, datefmt=config.LOG_DATEFMT,
                        stream=sys.stderr)
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig(**{k: v for k, v in vars(args).items() if v is not None})
        _emit(execute(cfg), cfg.out)
    except ValidationError as err:
        log.error(f"Invalid arguments: {err.errors()[0]['msg']}")
        return 2
    except WitnessLabError as err:
        log.error(f"{type(err).__name__}: {err}")
        return err.exit_code
    except OSError as err:
        log.error(f"I/O error: {err}")
        return 2
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
