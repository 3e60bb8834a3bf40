"""Command-line interface: ``adrctf {design,analyze,simulate,verify}``.

Exit codes: 0 ok, 1 verification failure, 2 configuration error, 3 design
degeneracy, 4 analysis degeneracy, 5 simulation divergence.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .design import (
    ContinuousTuning,
    GainSet,
    PlantSpec,
    bandwidth_gains,
    continuous_tf_general,
)
from .discrete import discrete_bandwidth_gains, discrete_tf_general
from .errors import AdrcError, AnalysisError, ConfigError, DesignError
from .freq import (
    GangOfSix,
    RationalTf,
    adrc_ct_to_rational,
    adrc_dt_to_rational,
    bode,
    damping,
    default_grid,
    estimate_b0_crossover,
    fb_poles_zeros,
    fb_poles_zeros_numeric,
    freqresp,
    gang_of_six,
    PoleZeroSet,
)
from .runtime import SsController, TfController
from .sim import Scenario, closed_loop_bandwidth, metrics, plant_from_tf, run_closed_loop
from .verify import CHECKS, run_verify

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_DESIGN, EXIT_ANALYSIS, EXIT_DIVERGED = range(6)

PLANT_HELP = 'plant as "num0,num1,.../den0,den1,..." with ascending powers of s'


# --- serialization -------------------------------------------------------------


def _fmt(x) -> str:
    if isinstance(x, bool) or x is None:
        return json.dumps(x)
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return "%.17g" % x if math.isfinite(x) else "null"
    if isinstance(x, str):
        return json.dumps(x)
    raise TypeError(f"cannot serialize {type(x).__name__}")


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON with every float written to 17 significant digits; non-finite -> null."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        vals = [dumps(v, indent, _level + 1) for v in obj]
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj):
            return "[" + ", ".join(vals) + "]"
        return "[\n" + ",\n".join(pad + v for v in vals) + "\n" + end + "]"
    return _fmt(obj)


def _reject_constant(name):
    raise ConfigError(f"non-finite number {name} is not allowed")


def load_json(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fp:
            text = fp.read()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from exc
    try:
        doc = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    return doc


# --- configuration -------------------------------------------------------------


@dataclass(frozen=True)
class DesignConfig:
    """Either bandwidth parameters (omega_cl, k_eso) or explicit gains (k, l[, l_d])."""

    n: int
    b0: float
    omega_cl: Optional[float] = None
    k_eso: Optional[float] = None
    T: Optional[float] = None
    k: Optional[tuple] = None
    l: Optional[tuple] = None
    l_d: Optional[tuple] = None
    limits: Optional[tuple] = None

    KEYS = ("n", "b0", "omega_cl", "k_eso", "T", "k", "l", "l_d", "limits")
    # sections emitted by ``design`` that are ignored when the document is read back
    OUTPUT_SECTIONS = ("tuning", "continuous", "discrete")

    @property
    def explicit(self) -> bool:
        return self.k is not None

    @property
    def plant(self) -> PlantSpec:
        return PlantSpec(self.n, self.b0)

    @property
    def reference_frequency(self) -> float:
        """omega_cl, or the closed-loop pole radius implied by k1 for explicit gains."""
        if self.omega_cl is not None:
            return self.omega_cl
        return abs(self.k[0]) ** (1.0 / self.n)

    def continuous_gains(self) -> GainSet:
        if self.explicit:
            return GainSet(self.k, self.l)
        return bandwidth_gains(self.n, ContinuousTuning(self.omega_cl, self.k_eso))

    def discrete_gains(self) -> GainSet:
        if self.T is None:
            raise ConfigError("field 'T': required for discrete design")
        if self.explicit:
            return GainSet(self.k, self.l_d)
        return discrete_bandwidth_gains(self.n, ContinuousTuning(self.omega_cl, self.k_eso), self.T)


def _num(doc, key, kind=float):
    v = doc[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"field '{key}': expected a number, got {v!r}")
    if kind is int:
        if float(v) != int(v):
            raise ConfigError(f"field '{key}': expected an integer, got {v!r}")
        return int(v)
    return float(v)


def _vec(doc, key, size=None):
    v = doc[key]
    if not isinstance(v, list) or any(isinstance(x, bool) or not isinstance(x, (int, float)) for x in v):
        raise ConfigError(f"field '{key}': expected a list of numbers")
    if size is not None and len(v) != size:
        raise ConfigError(f"field '{key}': expected {size} entries, got {len(v)}")
    return tuple(float(x) for x in v)


def parse_design_config(doc: dict) -> DesignConfig:
    unknown = set(doc) - set(DesignConfig.KEYS) - set(DesignConfig.OUTPUT_SECTIONS)
    if unknown:
        raise ConfigError(f"unknown field(s): {', '.join(sorted(unknown))}")
    for key in ("n", "b0"):
        if key not in doc:
            raise ConfigError(f"field '{key}': required")
    n = _num(doc, "n", int)
    b0 = _num(doc, "b0")
    has_bw = [key in doc for key in ("omega_cl", "k_eso")]
    has_ex = [key in doc for key in ("k", "l")]
    if any(has_bw) and any(has_ex):
        raise ConfigError("give either omega_cl/k_eso or explicit gains k/l, not both")
    if any(has_bw) and not all(has_bw):
        raise ConfigError(f"field '{'k_eso' if has_bw[0] else 'omega_cl'}': required with bandwidth parameters")
    if any(has_ex) and not all(has_ex):
        raise ConfigError(f"field '{'l' if has_ex[0] else 'k'}': required with explicit gains")
    if not any(has_bw) and not any(has_ex):
        raise ConfigError("either omega_cl/k_eso or explicit gains k/l are required")
    if "l_d" in doc and not all(has_ex):
        raise ConfigError("field 'l_d': only allowed with explicit gains")
    T = _num(doc, "T") if "T" in doc else None
    fields = dict(n=n, b0=b0, T=T)
    if all(has_bw):
        fields.update(omega_cl=_num(doc, "omega_cl"), k_eso=_num(doc, "k_eso"))
    else:
        fields.update(k=_vec(doc, "k", n), l=_vec(doc, "l", n + 1))
        if T is not None:
            if "l_d" not in doc:
                raise ConfigError("field 'l_d': discrete observer gains are required with explicit gains and T")
            fields["l_d"] = _vec(doc, "l_d", n + 1)
    if "limits" in doc:
        fields["limits"] = _vec(doc, "limits", 2)
    cfg = DesignConfig(**fields)
    # range validation by the domain types
    cfg.plant
    if cfg.explicit:
        cfg.continuous_gains()
    else:
        ContinuousTuning(cfg.omega_cl, cfg.k_eso)
    if T is not None:
        from .discrete import _check_T

        _check_T(T)
    return cfg


def load_design_config(path: str) -> DesignConfig:
    return parse_design_config(load_json(path))


def parse_plant(text: str) -> RationalTf:
    try:
        num_s, den_s = text.split("/")
        num = [float(v) for v in num_s.split(",")]
        den = [float(v) for v in den_s.split(",")]
    except ValueError as exc:
        raise ConfigError(f"--plant: cannot parse {text!r}; {PLANT_HELP}") from exc
    if not all(math.isfinite(v) for v in num + den):
        raise ConfigError("--plant: coefficients must be finite")
    return RationalTf(num, den)


def parse_grid(text: str) -> np.ndarray:
    try:
        lo, hi, pts = text.split(":")
        lo, hi, pts = float(lo), float(hi), int(pts)
    except ValueError as exc:
        raise ConfigError(f"--grid: expected lo:hi:points, got {text!r}") from exc
    if not (0 < lo < hi and math.isfinite(hi) and pts >= 2):
        raise ConfigError("--grid: need 0 < lo < hi and points >= 2")
    return np.logspace(math.log10(lo), math.log10(hi), pts)


# --- commands --------------------------------------------------------------------


def design_document(cfg: DesignConfig) -> dict:
    """Gains and coefficients; all coefficients come from the resolvent path."""
    g = cfg.continuous_gains()
    doc = {"n": cfg.n, "b0": cfg.b0}
    if cfg.T is not None:
        doc["T"] = cfg.T
    doc["k"] = list(g.k)
    doc["l"] = list(g.l)
    gd = None
    if cfg.T is not None:
        gd = cfg.discrete_gains()
        doc["l_d"] = list(gd.l)
    if cfg.limits is not None:
        doc["limits"] = list(cfg.limits)
    if not cfg.explicit:
        doc["tuning"] = {"omega_cl": cfg.omega_cl, "k_eso": cfg.k_eso}
    ct = continuous_tf_general(cfg.plant, g).as_dict()
    del ct["n"]
    doc["continuous"] = ct
    if gd is not None:
        dt = discrete_tf_general(cfg.plant, gd.k, gd.l, cfg.T).as_dict()
        del dt["n"], dt["T"]
        doc["discrete"] = dt
    return doc


def cmd_design(args, out) -> int:
    cfg = load_design_config(args.config)
    out.write(dumps(design_document(cfg)) + "\n")
    return EXIT_OK


def _write_csv(out, header, columns):
    out.write(",".join(header) + "\n")
    for row in zip(*columns):
        out.write(",".join("%.17g" % v for v in row) + "\n")


def _pz_document(cfg: DesignConfig) -> dict:
    if not cfg.explicit and cfg.n in (1, 2):
        return fb_poles_zeros(cfg.n, cfg.omega_cl, cfg.k_eso).as_dict()
    poles, zeros = fb_poles_zeros_numeric(continuous_tf_general(cfg.plant, cfg.continuous_gains()))
    pairs_p = [p for p in poles if p.imag > 0]
    pairs_z = [z for z in zeros if z.imag > 0]
    return PoleZeroSet(
        tuple(poles),
        tuple(zeros),
        tuple(damping(p) for p in pairs_p),
        tuple(damping(z) for z in pairs_z),
        float(max(abs(p) for p in poles)),
        float(max(abs(z) for z in zeros)) if len(zeros) else 0.0,
    ).as_dict()


def cmd_analyze(args, out) -> int:
    cfg = load_design_config(args.config)
    if args.what in ("gang", "b0") and args.plant is None:
        raise ConfigError(f"--plant is required for --what {args.what}")
    if args.what == "pz":
        out.write(dumps(_pz_document(cfg)) + "\n")
        return EXIT_OK
    if args.what == "b0":
        out.write("%.17g\n" % estimate_b0_crossover(parse_plant(args.plant), cfg.n))
        return EXIT_OK

    ct = continuous_tf_general(cfg.plant, cfg.continuous_gains())
    blocks = adrc_ct_to_rational(ct)
    if args.domain == "discrete":
        if args.what == "gang":
            raise ConfigError("--what gang is continuous-time only")
        gd = cfg.discrete_gains()
        blocks = adrc_dt_to_rational(discrete_tf_general(cfg.plant, gd.k, gd.l, cfg.T))
    if args.grid is not None:
        omegas = parse_grid(args.grid)
    else:
        omegas = default_grid(cfg.reference_frequency)
        if args.domain == "discrete":
            omegas = omegas[omegas < math.pi / cfg.T]

    if args.what == "bode":
        names = [args.block] if args.block else list(blocks)
        for name in names:
            if name not in blocks:
                raise ConfigError(f"--block {name} is not available in the {args.domain} domain")
        if args.block:
            mag, ph = bode(blocks[args.block], omegas)
            _write_csv(out, ("omega", "mag_db", "phase_deg"), (omegas, mag, ph))
        else:
            out.write("block,omega,mag_db,phase_deg\n")
            for name in names:
                mag, ph = bode(blocks[name], omegas)
                for w, m, p in zip(omegas, mag, ph):
                    out.write("%s,%.17g,%.17g,%.17g\n" % (name, w, m, p))
        return EXIT_OK

    gang = gang_of_six(parse_plant(args.plant), blocks["C_FB"], blocks["C_PF"], blocks["C_FF"])
    cols = [omegas] + [20.0 * np.log10(np.abs(freqresp(tf, omegas))) for _, tf in gang.items()]
    _write_csv(out, ("omega",) + GangOfSix.NAMES, cols)
    return EXIT_OK


def parse_scenario(doc: dict, T_default: Optional[float]) -> tuple:
    """Returns (Scenario, plant RationalTf or None)."""
    known = {"T", "steps", "duration", "r_profile", "d_profile", "noise_sigma", "seed", "actuator_limits", "plant"}
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"scenario: unknown field(s): {', '.join(sorted(unknown))}")
    T = _num(doc, "T") if "T" in doc else T_default
    if T is None:
        raise ConfigError("scenario: sample time T missing in both config and scenario")
    if T_default is not None and T != T_default:
        raise ConfigError(f"scenario: field 'T' ({T}) differs from the design sample time ({T_default})")
    if ("steps" in doc) == ("duration" in doc):
        raise ConfigError("scenario: give exactly one of 'steps' or 'duration'")

    def profile(key):
        v = doc.get(key, [])
        if not isinstance(v, list) or any(not (isinstance(p, list) and len(p) == 2) for p in v):
            raise ConfigError(f"scenario: field '{key}': expected a list of [t, value] pairs")
        return tuple(tuple(p) for p in v)

    kw = dict(
        r_profile=profile("r_profile") if "r_profile" in doc else ((0.0, 1.0),),
        d_profile=profile("d_profile"),
        noise_sigma=_num(doc, "noise_sigma") if "noise_sigma" in doc else 0.0,
        seed=_num(doc, "seed", int) if "seed" in doc else 0,
        actuator_limits=_vec(doc, "actuator_limits", 2) if "actuator_limits" in doc else None,
    )
    if "steps" in doc:
        scenario = Scenario(T=T, steps=_num(doc, "steps", int), **kw)
    else:
        scenario = Scenario.for_duration(T, _num(doc, "duration"), **kw)
    plant = None
    if "plant" in doc:
        p = doc["plant"]
        if not isinstance(p, dict) or set(p) != {"num", "den"}:
            raise ConfigError("scenario: field 'plant': expected {\"num\": [...], \"den\": [...]}")
        plant = RationalTf(_vec(p, "num"), _vec(p, "den"))
    return scenario, plant


def make_controller(cfg: DesignConfig, form: str):
    gd = cfg.discrete_gains()
    if form == "tf":
        return TfController(discrete_tf_general(cfg.plant, gd.k, gd.l, cfg.T), cfg.limits)
    if cfg.limits is not None:
        raise ConfigError("field 'limits': the state-space form has no clamped accumulator; use --form tf")
    return SsController(cfg.plant, gd, cfg.T)


def cmd_simulate(args, out) -> int:
    cfg = load_design_config(args.config)
    if cfg.T is None:
        raise ConfigError("field 'T': required for simulation")
    scenario, plant_tf = parse_scenario(load_json(args.scenario), cfg.T)
    if args.plant is not None:
        plant_tf = parse_plant(args.plant)
    if plant_tf is None:
        # nominal model b0 / s^n
        plant_tf = RationalTf([cfg.b0], [0.0] * cfg.n + [1.0])
    controller = make_controller(cfg, args.form)
    trace = run_closed_loop(plant_from_tf(plant_tf), controller, scenario)
    with open(args.trace, "w", encoding="utf-8", newline="\n") as fp:
        trace.to_csv(fp)
    doc = {"steps": len(trace), "diverged_at": trace.diverged_at}
    if trace.diverged_at is None:
        try:
            m = metrics(trace)
            doc["step"] = m.as_dict()
            doc["step"]["closed_loop_bandwidth"] = closed_loop_bandwidth(trace)
        except AnalysisError:
            doc["step"] = None
    with open(args.metrics, "w", encoding="utf-8", newline="\n") as fp:
        fp.write(dumps(doc) + "\n")
    if trace.diverged_at is not None:
        print(f"diverged at step {trace.diverged_at}", file=sys.stderr)
        return EXIT_DIVERGED
    return EXIT_OK


def cmd_verify(args, out) -> int:
    if args.trials < 1:
        raise ConfigError("--trials must be >= 1")
    report = run_verify(args.n, args.trials, args.seed, inject_fault=args.inject_fault)
    out.write("\n".join(report.lines()) + "\n")
    return EXIT_OK if report.passed else EXIT_VERIFY


# --- entry point -----------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="adrctf", description="Linear ADRC in transfer-function form.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    d = sub.add_parser("design", help="print gains and continuous/discrete coefficients as JSON")
    d.add_argument("config")
    d.set_defaults(func=cmd_design)

    a = sub.add_parser("analyze", help="frequency-domain data as CSV/JSON")
    a.add_argument("config")
    a.add_argument("--what", choices=("bode", "gang", "pz", "b0"), required=True)
    a.add_argument("--plant", help=PLANT_HELP)
    a.add_argument("--grid", help="log-spaced grid lo:hi:points in rad/s (default 400 points over [1e-2, 1e3]*omega_cl)")
    a.add_argument("--block", choices=("C_FB", "C_PF", "C_FF"), help="bode: emit a single block as omega,mag_db,phase_deg")
    a.add_argument("--domain", choices=("continuous", "discrete"), default="continuous")
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("simulate", help="closed-loop simulation; writes trace CSV and metrics JSON")
    s.add_argument("config")
    s.add_argument("scenario")
    s.add_argument("--form", choices=("tf", "ss"), default="tf")
    s.add_argument("--plant", help=PLANT_HELP + " (default: b0/s^n or the scenario's plant)")
    s.add_argument("--trace", default="trace.csv")
    s.add_argument("--metrics", default="metrics.json")
    s.set_defaults(func=cmd_simulate)

    v = sub.add_parser("verify", help="randomized table and runtime equivalence checks")
    v.add_argument("--n", type=int, choices=(1, 2), required=True)
    v.add_argument("--trials", type=int, default=100)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--inject-fault", choices=CHECKS, help=argparse.SUPPRESS)
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except AdrcError as exc:
        print(f"adrctf: error: {exc}", file=sys.stderr)
        return exit_code(exc)


def exit_code(exc: AdrcError) -> int:
    if isinstance(exc, DesignError):
        return EXIT_DESIGN
    if isinstance(exc, AnalysisError):
        return EXIT_ANALYSIS
    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
