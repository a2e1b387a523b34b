"""Command-line front end: build, verify, simulate and tables.

Exit codes: 0 success, 1 verification failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field, replace
from fractions import Fraction
from importlib import resources
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import cost, lowering
from .ansatz import AnsatzSpec, ExcitationTerm, InvalidTerm, compile_ansatz, enumerate_reference_excitations, term_qubits
from .circuit import count_gates, export_qasm
from .encoding import InvalidState, ModeSpec, format_ket
from .simulator import (
    NoiseModel, apply_circuit_batch, apply_circuit, distribution, oracle_ansatz_state,
    oracle_term_unitary, sample_shots, simulate_noisy, tvd, write_histogram_csv,
)

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2
MCR_CHOICES = ("multiplex", "multiplex-merge", "ancilla", "ancilla-full")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    name: str
    ansatz: AnsatzSpec
    angles_pi: tuple[str, ...]
    method: str = "redundant"
    mcr: str = "multiplex"
    prune: bool = True
    model: cost.CostModel = field(default_factory=cost.CostModel)
    shots: int = 1024
    seed: int = 0
    noise: float = 0.0


def _line_of(text: str, key: str) -> int | None:
    for i, line in enumerate(text.splitlines(), 1):
        if line.strip().startswith(f"{key} ") or line.strip().startswith(f"{key}="):
            return i
    return None


def _err(text: str, key: str, msg: str) -> ConfigError:
    line = _line_of(text, key)
    where = f"line {line}: " if line else ""
    return ConfigError(f"{where}{key}: {msg}")


def parse_angle(value) -> float:
    """An angle in units of pi: a rational string such as ``"7/8"`` or a number."""
    if isinstance(value, str):
        try:
            return float(Fraction(value.strip())) * math.pi
        except (ValueError, ZeroDivisionError):
            raise ValueError(f"not a rational multiple of pi: {value!r}") from None
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value) * math.pi
    raise ValueError(f"not an angle: {value!r}")


def resolve_config_path(name: str) -> Path:
    p = Path(name)
    if p.exists():
        return p
    shipped = resources.files("uvcc") / "configs" / f"{p.stem}.toml"
    if shipped.is_file():
        return Path(str(shipped))
    raise ConfigError(f"config {name!r} not found (shipped configs: s6, s8)")


def load_config(path) -> RunConfig:
    path = resolve_config_path(str(path))
    text = path.read_text()
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    modes = raw.get("modes", {})
    ans = raw.get("ansatz", {})
    low = raw.get("lowering", {})
    sim = raw.get("simulate", {})
    try:
        spec = ModeSpec.from_levels(modes["levels"], modes.get("labels"))
    except (KeyError, TypeError, ValueError) as exc:
        raise _err(text, "levels", str(exc)) from None
    reference = tuple(ans.get("reference", (0,) * len(spec)))
    if "targets" in ans:
        targets = [tuple(t) for t in ans["targets"]]
    elif "max_order" in ans:
        try:
            targets = [t.target(reference) for t in enumerate_reference_excitations(spec, int(ans["max_order"]))]
        except ValueError as exc:
            raise _err(text, "max_order", str(exc)) from None
    else:
        raise ConfigError("[ansatz] needs either targets or max_order")
    angles_pi = ans.get("angles", [])
    if len(angles_pi) != len(targets):
        raise _err(text, "angles", f"{len(angles_pi)} angles for {len(targets)} terms")
    try:
        angles = [parse_angle(a) for a in angles_pi]
    except ValueError as exc:
        raise _err(text, "angles", str(exc)) from None
    try:
        terms = [ExcitationTerm.from_target(reference, t, a) for t, a in zip(targets, angles)]
        ansatz = AnsatzSpec(spec, reference, tuple(terms))
    except (InvalidTerm, InvalidState, ValueError) as exc:
        raise _err(text, "targets", str(exc)) from None
    try:
        method = lowering.LoweringMethod.parse(low.get("method", "redundant")).value
    except ValueError as exc:
        raise _err(text, "method", str(exc)) from None
    mcr = low.get("mcr", "multiplex")
    if mcr not in MCR_CHOICES:
        raise _err(text, "mcr", f"expected one of {', '.join(MCR_CHOICES)}")
    try:
        model = cost.CostModel(int(low.get("A", 2)), int(low.get("B", 3)), low.get("toffoli", "relative"))
    except ValueError as exc:
        raise _err(text, "toffoli", str(exc)) from None
    shots = int(sim.get("shots", 1024))
    if shots < 1:
        raise _err(text, "shots", "must be >= 1")
    noise = float(sim.get("noise", 0.0))
    if not 0 <= noise <= 1:
        raise _err(text, "noise", "must lie in [0, 1]")
    return RunConfig(
        name=str(raw.get("name", path.stem)), ansatz=ansatz, angles_pi=tuple(str(a) for a in angles_pi),
        method=method, mcr=mcr, prune=bool(low.get("prune", True)), model=model,
        shots=shots, seed=int(sim.get("seed", 0)), noise=noise,
    )


def apply_overrides(cfg: RunConfig, args) -> RunConfig:
    kw = {}
    if getattr(args, "method", None):
        kw["method"] = lowering.LoweringMethod.parse(args.method).value
    if getattr(args, "mcr", None):
        kw["mcr"] = args.mcr
    if getattr(args, "shots", None) is not None:
        if args.shots < 1:
            raise ConfigError("--shots must be >= 1")
        kw["shots"] = args.shots
    if getattr(args, "seed", None) is not None:
        kw["seed"] = args.seed
    if getattr(args, "noise", None) is not None:
        if not 0 <= args.noise <= 1:
            raise ConfigError("--noise must lie in [0, 1]")
        kw["noise"] = args.noise
    return replace(cfg, **kw)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _emit(report: dict, out: Path | None, filename: str) -> None:
    text = _dump(report)
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        (out / filename).write_text(text)
    sys.stdout.write(text)


def _data_state(c, psi: np.ndarray) -> tuple[np.ndarray, float]:
    """Data-register amplitudes with ancillas in |0>, plus the leaked norm."""
    block = psi.reshape(2 ** c.width, -1)
    leak = float(np.linalg.norm(block[:, 1:])) if block.shape[1] > 1 else 0.0
    return block[:, 0], leak


# build ---------------------------------------------------------------------

def cmd_build(cfg: RunConfig, out: Path) -> int:
    c = compile_ansatz(cfg.ansatz, cfg.method, cfg.mcr, prune=cfg.prune)
    stem = f"{cfg.name}-{cfg.method}"
    out.mkdir(parents=True, exist_ok=True)
    (out / f"{stem}.qasm").write_text(export_qasm(c))
    counts = count_gates(c).to_dict()
    sidecar = {"name": cfg.name, "method": cfg.method, "mcr": cfg.mcr, "width": c.width,
               "ancillas": c.ancilla_count, "counts": counts}
    (out / f"{stem}.counts.json").write_text(_dump(sidecar))
    sys.stdout.write(_dump(sidecar))
    return EXIT_OK


# verify --------------------------------------------------------------------

def physical_term_inputs(m: int) -> list[int]:
    """Local basis states where each (g, e) pair holds at most one excitation."""
    out = []
    for bits in np.ndindex(*(3,) * m):
        s = "".join(("00", "10", "01")[b] for b in bits)
        out.append(int(s, 2))
    return out


def term_error(method: str, m: int, theta: float, mcr: str, inputs=None) -> float:
    pairs = [(2 * j, 2 * j + 1) for j in range(m)]
    c = lowering.lower_circuit(lowering.lower_term(pairs, theta, None, method), mcr)
    inputs = list(range(4 ** m)) if inputs is None else inputs
    eye = np.eye(4 ** m, dtype=complex)[inputs]
    got = apply_circuit_batch(c, eye)
    oracle = oracle_term_unitary(m, theta)[:, inputs].T
    want = np.zeros_like(got)
    want[:, :: 2 ** c.ancilla_count] = oracle
    return float(np.abs(got - want).max())


def cmd_verify(cfg: RunConfig, tolerance: float, out: Path | None, perturb: float = 0.0) -> int:
    a = cfg.ansatz
    report = {"name": cfg.name, "method": cfg.method, "mcr": cfg.mcr, "tolerance": tolerance, "terms": []}
    worst = 0.0
    for t in a.terms:
        inputs = physical_term_inputs(t.order) if cfg.method == "redundant" else None
        err = term_error(cfg.method, t.order, t.theta, cfg.mcr, inputs)
        worst = max(worst, err)
        report["terms"].append({"target": format_ket(t.target(a.reference.occupation)),
                                "order": t.order, "max_error": err})
    built = a
    if perturb:
        first = a.terms[0]
        built = AnsatzSpec(a.spec, a.reference, (first.with_theta(first.theta + perturb),) + a.terms[1:])
    c = compile_ansatz(built, cfg.method, cfg.mcr, prune=cfg.prune)
    data, leak = _data_state(c, apply_circuit(c))
    state_err = float(np.abs(data - oracle_ansatz_state(a)).max())
    report["state_max_error"] = state_err
    report["ancilla_leak"] = leak
    worst = max(worst, state_err, leak)
    report["worst_error"] = worst
    report["pass"] = worst <= tolerance
    _emit(report, out, f"verify-{cfg.name}-{cfg.method}.json")
    return EXIT_OK if report["pass"] else EXIT_FAIL


# simulate ------------------------------------------------------------------

def cmd_simulate(cfg: RunConfig, out: Path | None, repeats: int = 1) -> int:
    a = cfg.ansatz
    exact = distribution(oracle_ansatz_state(a))
    c = compile_ansatz(a, cfg.method, cfg.mcr, prune=cfg.prune)
    data, _ = _data_state(c, apply_circuit(c))
    seeds = [cfg.seed + k for k in range(repeats)]
    sampled = [sample_shots(distribution(data), cfg.shots, s) for s in seeds]
    report = {
        "name": cfg.name, "method": cfg.method, "mcr": cfg.mcr, "shots": cfg.shots, "seeds": seeds,
        "cx": count_gates(c).cx,
        "exact": exact,
        "sampled": sampled[0],
        "tvd_sampled": [tvd(exact, s) for s in sampled],
    }
    series = {f"{cfg.method}-sampled": sampled[0]}
    if cfg.noise > 0:
        noisy = [simulate_noisy(c, NoiseModel(cfg.noise, s), cfg.shots) for s in seeds]
        report["noise_p2"] = cfg.noise
        report["noisy"] = noisy[0]
        report["tvd_noisy"] = [tvd(exact, n) for n in noisy]
        report["tvd_noisy_mean"] = float(np.mean(report["tvd_noisy"]))
        series[f"{cfg.method}-noisy"] = noisy[0]
    report["tvd_sampled_mean"] = float(np.mean(report["tvd_sampled"]))
    stem = f"simulate-{cfg.name}-{cfg.method}"
    _emit(report, out, f"{stem}.json")
    if out is not None:
        write_histogram_csv(out / f"{stem}.csv", exact, series)
    return EXIT_OK


# tables --------------------------------------------------------------------

def tables_report(model: cost.CostModel, ms1=(1, 2, 3, 4), ms2=(2, 3, 4, 5, 6)) -> dict:
    t1 = cost.table1_report(ms1)
    audit = cost.audit_table1(ms1)
    merged = {(r.method, r.m): r.measured for r in cost.audit_table1(ms1, "multiplex-merge")}
    t2 = cost.table2_report(model, ms2)
    return {
        "table1": {
            **t1.to_dict(),
            "audit": [dict(r.to_dict(), measured_merged=merged[(r.method, r.m)]) for r in audit],
        },
        "table2": {
            **t2.to_dict(),
            "model": {"A": model.A, "B": model.B, "toffoli": model.toffoli_kind},
            "reduction_asymptotic": cost.reduction_percent(model),
            "toffoli_leading": {m: cost.toffoli_leading(m, model) for m in ("givens", "redundant")},
            "audit_full_upper_bound": [r.to_dict() for r in cost.audit_table2(model, (3, 4))],
        },
    }


def format_tables(rep: dict) -> str:
    lines = [rep["table1"]["title"], f"{'method':<12}{'m':>3}{'formula':>9}{'measured':>10}{'merged':>8}  deviation"]
    for r in rep["table1"]["audit"]:
        flag = "" if r["deviation"] == 0 else f"{r['deviation']:+d}"
        lines.append(f"{r['method']:<12}{r['m']:>3}{r['expected']:>9}{r['measured']:>10}"
                     f"{r['measured_merged']:>8}  {flag}")
    t2 = rep["table2"]
    lines += ["", t2["title"]]
    ms = sorted({int(m) for d in t2["counts"].values() for m in d})
    lines.append(f"{'method':<12}{'formula':<14}" + "".join(f"{'m=' + str(m):>7}" for m in ms))
    for meth, f in t2["formulas"].items():
        lines.append(f"{meth:<12}{f:<14}" + "".join(f"{t2['counts'][meth][str(m)]:>7}" for m in ms))
    lines.append(f"asymptotic reduction: {100 * t2['reduction_asymptotic']:.2f}%")
    lines.append("Toffoli leading terms: " + ", ".join(f"{k} {v}" for k, v in t2["toffoli_leading"].items()))
    return "\n".join(lines) + "\n"


def cmd_tables(model: cost.CostModel, out: Path | None, as_json: bool = False) -> int:
    rep = tables_report(model)
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        (out / "tables.json").write_text(_dump(rep))
    sys.stdout.write(_dump(rep) if as_json else format_tables(rep))
    return EXIT_OK


# argument handling -------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="uvcc", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="config path, or s6 / s8 for a shipped one")
    common.add_argument("--method", choices=[m.value for m in lowering.LoweringMethod])
    common.add_argument("--mcr", choices=MCR_CHOICES, help="multi-controlled rotation scheme")

    b = sub.add_parser("build", parents=[common], help="write OPENQASM and gate counts")
    b.add_argument("--out", type=Path, default=Path("out"))

    v = sub.add_parser("verify", parents=[common], help="check lowering against the oracle")
    v.add_argument("--tolerance", type=float, default=1e-9)
    v.add_argument("--perturb", type=float, default=0.0,
                   help="add this angle to the first built term (negative control)")
    v.add_argument("--out", type=Path)

    s = sub.add_parser("simulate", parents=[common], help="exact, sampled and noisy distributions")
    s.add_argument("--shots", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--noise", type=float, help="two-qubit depolarizing probability")
    s.add_argument("--repeats", type=int, default=1, help="number of consecutive seeds")
    s.add_argument("--out", type=Path)

    t = sub.add_parser("tables", help="formula and measured CNOT tables")
    t.add_argument("--A", type=int, default=2)
    t.add_argument("--B", type=int, default=3)
    t.add_argument("--toffoli", choices=cost.TOFFOLI_KINDS, default="relative")
    t.add_argument("--json", action="store_true")
    t.add_argument("--out", type=Path)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "tables":
            return cmd_tables(cost.CostModel(args.A, args.B, args.toffoli), args.out, args.json)
        cfg = apply_overrides(load_config(args.config), args)
        if args.command == "build":
            return cmd_build(cfg, args.out)
        if args.command == "verify":
            return cmd_verify(cfg, args.tolerance, args.out, args.perturb)
        if args.repeats < 1:
            raise ConfigError("--repeats must be >= 1")
        return cmd_simulate(cfg, args.out, args.repeats)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
