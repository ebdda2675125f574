"""Command-line front end.

Subcommands ``sig``, ``sweep``, ``phase``, ``verify-bounds``, ``oracle`` and
``dump`` read an INI config (sections ``model``, ``localizer``, ``sweep``,
``phase``, ``bounds``, ``oracle``, ``dump``) and write CSV/JSON files to
``--out``.  Exit codes: 0 ok, 1 verification mismatch, 2 usage, config or
precondition error.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import __version__
from .bounds import (BoundError, BoundReport, check_gap_lemmas, check_holmgren_commutator,
                     fl2d_suite, fl_suite, holmgren_suite, random_budgeted)
from .flow import FlowError, flow_property_suite, localizer_path, spectral_flow, write_trajectories
from .invariants import InvariantError, model_invariant
from .lattice import enumerate_box
from .localizer import (LocalizerError, LocalizerSpec, build_infinite_surrogate, build_localizer,
                        gap_lower_bound, localizer_inertia, model_constants)
from .operators import LocalityBudget, Model, OperatorError, dump_operator

log = logging.getLogger("speclocalizer")

OK, MISMATCH, USAGE = 0, 1, 2


class ConfigError(ValueError):
    pass


def _floats(s: str) -> list[float]:
    return [float(x) for x in s.replace(",", " ").split()]


def _ints(s: str) -> list[int]:
    return [int(x) for x in s.replace(",", " ").split()]


# section -> key -> (parser, default)
SCHEMA = {
    "model": {"name": (str, "ssh"), "v": (float, 0.4), "w": (float, 1.0),
              "disorder": (float, 0.0), "seeds": (_ints, [0]), "m": (float, 1.0)},
    "localizer": {"ell": (int, 30), "outer_ell": (int, None), "kappas": (_floats, [0.1]),
                  "mu": (float, 1.0), "zero_tolerance": (float, None),
                  "probe_radius": (int, None)},
    "sweep": {"kappa_min": (float, 0.0), "kappa_max": (float, 1.0), "points": (int, 21),
              "flow_points": (int, 21)},
    "phase": {"parameter": (str, "m"), "start": (float, -4.0), "stop": (float, 4.0),
              "points": (int, 9)},
    "bounds": {"draws": (int, 100), "dim": (int, 8), "mu": (float, 1.0), "C": (float, None)},
    "oracle": {"nk": (int, None), "margin": (int, None)},
    "dump": {"what": (str, "localizer"), "kappa": (float, 0.1)},
}


@dataclass(frozen=True)
class RunConfig:
    """Validated configuration; ``sections[name][key]`` holds parsed values."""

    sections: dict
    seed_override: int | None = None

    def get(self, section: str, key: str):
        return self.sections[section][key]

    @property
    def seeds(self) -> list[int]:
        if self.seed_override is not None:
            return [self.seed_override]
        return self.get("model", "seeds")

    def model(self, seed: int | None = None, **changes) -> Model:
        m = self.sections["model"]
        seed = self.seeds[0] if seed is None else seed
        model = Model(m["name"], m["v"], m["w"], m["disorder"], seed, m["m"])
        return replace(model, **changes)

    def spec(self, model: Model, kappa: float) -> LocalizerSpec:
        loc = self.sections["localizer"]
        return LocalizerSpec(model, loc["ell"], kappa, outer_ell=loc["outer_ell"])

    @property
    def probe_radius(self) -> int:
        r = self.get("localizer", "probe_radius")
        if r is not None:
            return r
        return 200 if self.model().d == 1 else 12


def load_config(path: str | None, seed: int | None = None) -> RunConfig:
    """Parse and validate a config file; ``None`` gives the defaults.

    Raises
    ------
    ConfigError
        On unknown sections or keys, unparsable values or values outside
        the module preconditions.
    """
    cp = configparser.ConfigParser()
    cp.optionxform = str
    if path is not None:
        if not Path(path).is_file():
            raise ConfigError(f"config file not found: {path}")
        try:
            cp.read(path)
        except configparser.Error as exc:
            raise ConfigError(str(exc)) from None
    sections = {}
    for name in cp.sections():
        if name not in SCHEMA:
            raise ConfigError(f"unknown section [{name}]")
    for name, keys in SCHEMA.items():
        vals = {k: default for k, (_, default) in keys.items()}
        if cp.has_section(name):
            for k, raw in cp.items(name):
                if k not in keys:
                    raise ConfigError(f"[{name}] unknown key {k!r}")
                try:
                    vals[k] = keys[k][0](raw)
                except ValueError:
                    raise ConfigError(f"[{name}] {k}: cannot parse {raw!r}") from None
        sections[name] = vals
    cfg = RunConfig(sections, seed)
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig):
    m, loc = cfg.sections["model"], cfg.sections["localizer"]
    if m["name"] not in ("ssh", "qwz"):
        raise ConfigError(f"[model] name: unknown model {m['name']!r}")
    if m["disorder"] < 0:
        raise ConfigError("[model] disorder must be non-negative")
    if not cfg.seeds:
        raise ConfigError("[model] seeds must not be empty")
    if loc["ell"] < 1:
        raise ConfigError("[localizer] ell must be >= 1")
    if loc["outer_ell"] is not None and loc["outer_ell"] < 2 * loc["ell"]:
        raise ConfigError("[localizer] outer_ell must be >= 2 ell")
    if not loc["kappas"] or any(not 0 <= k <= 1 for k in loc["kappas"]):
        raise ConfigError("[localizer] kappas must be a non-empty list in [0, 1]")
    if loc["mu"] <= 0 or cfg.get("bounds", "mu") <= 0:
        raise ConfigError("mu must be positive")
    sw = cfg.sections["sweep"]
    if not 0 <= sw["kappa_min"] < sw["kappa_max"] <= 1 or sw["points"] < 2 \
            or sw["flow_points"] < 2:
        raise ConfigError("[sweep] needs 0 <= kappa_min < kappa_max <= 1 and points >= 2")
    ph = cfg.sections["phase"]
    if ph["parameter"] not in ("m", "v", "w", "disorder"):
        raise ConfigError(f"[phase] parameter: unknown {ph['parameter']!r}")
    if ph["points"] < 1:
        raise ConfigError("[phase] points must be >= 1 (empty grid)")
    b = cfg.sections["bounds"]
    if b["draws"] < 1 or b["dim"] < 2:
        raise ConfigError("[bounds] draws must be >= 1 and dim >= 2")
    if cfg.get("dump", "what") not in ("localizer", "surrogate", "hamiltonian", "trajectories"):
        raise ConfigError("[dump] what must be localizer, surrogate, hamiltonian or trajectories")


# ----------------------------------------------------------------- output ---

def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return "" if x is None else str(x)


def write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def write_json(path: Path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=float)
        fh.write("\n")


def _map(fn, tasks, workers: int):
    """Ordered map, optionally on a process pool."""
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, tasks))


# ------------------------------------------------------------------- sig ---

SIG_COLUMNS = ["model", "seed", "ell", "kappa", "n_plus", "n_minus", "n_zero",
               "half_signature", "min_abs_eig", "certified", "oracle", "match", "note"]


def _sig_task(task):
    cfg, seed, kappa = task
    model = cfg.model(seed)
    res = localizer_inertia(cfg.spec(model, kappa), cfg.get("localizer", "zero_tolerance"))
    half = res.signature / 2
    if kappa == 1.0:
        oracle, match, note = 0, res.signature == 0, "endpoint"
    else:
        inv = model_invariant(model, cfg.get("localizer", "ell"), cfg.get("oracle", "nk"),
                              cfg.get("oracle", "margin"))
        oracle, match, note = inv.value, half == inv.value, ""
    return [model.label(), seed, cfg.get("localizer", "ell"), kappa, res.n_plus, res.n_minus,
            res.n_zero, half, res.min_abs_eig, res.certified, oracle, match, note]


def _seeds_for(cfg: RunConfig) -> list[int]:
    # clean models do not depend on the seed
    return cfg.seeds if cfg.get("model", "disorder") > 0 else cfg.seeds[:1]


def cmd_sig(cfg: RunConfig, out: Path, workers: int = 1) -> int:
    tasks = [(cfg, s, k) for s in _seeds_for(cfg) for k in cfg.get("localizer", "kappas")]
    rows = _map(_sig_task, tasks, workers)
    write_csv(out / "sig.csv", SIG_COLUMNS, rows)
    summary = {"ell": cfg.get("localizer", "ell"), "runs": len(rows),
               "certified": sum(r[9] for r in rows), "matches": sum(r[11] for r in rows)}
    try:
        tc, _ = model_constants(cfg.model(), cfg.get("localizer", "mu"), cfg.probe_radius,
                                disorder_ell=cfg.get("localizer", "ell"))
        summary.update(kappa_star=tc.kappa_star, ell_min=tc.ell_min, note=tc.note)
    except LocalizerError as exc:
        summary.update(kappa_star=None, ell_min=None, note=str(exc))
    write_json(out / "sig.json", summary)
    for r in rows:
        print(f"{r[0]} kappa={r[3]:g} half_signature={r[7]:g} oracle={r[10]} "
              f"certified={_fmt(r[9])} match={_fmt(r[11])} {r[12]}".rstrip())
    print(f"kappa_star={_fmt(summary['kappa_star'])} ell_used={summary['ell']}")
    if not all(r[9] for r in rows):
        return USAGE
    return OK if all(r[11] for r in rows) else MISMATCH


# ----------------------------------------------------------------- sweep ---

SWEEP_COLUMNS = ["kappa", "n_plus", "n_minus", "n_zero", "signature", "min_abs_eig",
                 "gap_lower_bound"]


def _sweep_task(task):
    cfg, kappa = task
    res = localizer_inertia(cfg.spec(cfg.model(), kappa), cfg.get("localizer", "zero_tolerance"))
    return [kappa, res.n_plus, res.n_minus, res.n_zero, res.signature, res.min_abs_eig]


def cmd_sweep(cfg: RunConfig, out: Path, workers: int = 1) -> int:
    sw, model, d = cfg.sections["sweep"], cfg.model(), cfg.model().d
    grid = np.linspace(sw["kappa_min"], sw["kappa_max"], sw["points"])
    tc, budget = model_constants(model, cfg.get("localizer", "mu"), cfg.probe_radius,
                                 disorder_ell=cfg.get("localizer", "ell"))
    rows = _map(_sweep_task, [(cfg, float(k)) for k in grid], workers)
    below_bound = 0
    for r in rows:
        k = r[0]
        lb = gap_lower_bound(k, budget, tc.gapH, d) if k < 2 * tc.kappa_star else None
        below_bound += lb is not None and r[5] < lb
        r.append(lb)
    write_csv(out / "sweep.csv", SWEEP_COLUMNS, rows)
    path = localizer_path(cfg.spec(model, tc.kappa_star),
                          np.linspace(tc.kappa_star, 1.0, sw["flow_points"]))
    fr = spectral_flow(path)
    crossings = [[c.t_lo, c.t_hi, c.direction * c.multiplicity] for c in fr.crossings]
    summary = {"kappa_star": tc.kappa_star, "flow": fr.flow, "crossings": crossings,
               "signature_start": fr.start.signature, "signature_end": fr.end.signature,
               "flow_matches_signature": 2 * fr.flow == fr.end.signature - fr.start.signature,
               "endpoint_signature_zero": fr.end.signature == 0,
               "points_below_bound": int(below_bound)}
    write_json(out / "sweep.json", summary)
    print(f"{model.label()} flow[kappa_star,1]={fr.flow} crossings={len(crossings)} "
          f"signature(kappa_star)={fr.start.signature} signature(1)={fr.end.signature}")
    ok = summary["flow_matches_signature"] and summary["endpoint_signature_zero"]
    return OK if ok else MISMATCH


# ----------------------------------------------------------------- phase ---

PHASE_COLUMNS = ["parameter", "value", "kappa", "half_signature", "certified", "oracle", "match"]


def _phase_task(task):
    cfg, name, value = task
    model = cfg.model(**{name: value})
    kappa = cfg.get("localizer", "kappas")[0]
    res = localizer_inertia(cfg.spec(model, kappa), cfg.get("localizer", "zero_tolerance"))
    half = res.signature / 2
    try:
        oracle = model_invariant(model, cfg.get("localizer", "ell"), cfg.get("oracle", "nk"),
                                 cfg.get("oracle", "margin")).value
    except InvariantError:
        oracle = None  # gap closes on the oracle grid
    return [name, value, kappa, half, res.certified, oracle,
            oracle is not None and half == oracle]


def cmd_phase(cfg: RunConfig, out: Path, workers: int = 1) -> int:
    ph = cfg.sections["phase"]
    values = np.linspace(ph["start"], ph["stop"], ph["points"])
    rows = _map(_phase_task, [(cfg, ph["parameter"], float(v)) for v in values], workers)
    write_csv(out / "phase.csv", PHASE_COLUMNS, rows)
    bad = [r for r in rows if r[4] and r[5] is not None and not r[6]]
    for r in rows:
        print(f"{r[0]}={r[1]:g} half_signature={r[3]:g} oracle={_fmt(r[5])} "
              f"certified={_fmt(r[4])}")
    return MISMATCH if bad else OK


# ---------------------------------------------------------------- verify ---

VERIFY_COLUMNS = ["lemma", "instance", "lhs", "rhs", "margin", "passed"]


def _verify_task(task):
    name, draws, seed, dim = task
    if name == "A.1":
        return holmgren_suite(draws, seed)
    if name == "A.2":
        return fl_suite(draws, seed)
    if name == "A.3":
        return fl2d_suite(draws, seed)
    if name == "B":
        return check_gap_lemmas(dim, draws, seed)
    return [BoundReport(f"flow {c.prop}", abs(c.got - c.expected), 0.0, c.instance)
            for c in flow_property_suite(min(draws, 50), draws, seed)]


def cmd_verify(cfg: RunConfig, out: Path, workers: int = 1) -> int:
    b = cfg.sections["bounds"]
    seed = cfg.seeds[0]
    if b["C"] is not None:
        # an explicit budget is a precondition on every operator drawn
        rng = np.random.default_rng(seed)
        A, est = random_budgeted(enumerate_box(1, 20), 2, b["mu"], rng)
        check_holmgren_commutator(A, LocalityBudget(b["C"], b["mu"]))
    tasks = [(n, b["draws"], seed, b["dim"]) for n in ("A.1", "A.2", "A.3", "B", "flow")]
    reports = [r for chunk in _map(_verify_task, tasks, workers) for r in chunk]
    write_csv(out / "verify.csv", VERIFY_COLUMNS,
              [[r.lemma, r.instance, r.lhs, r.rhs, r.margin, r.passed] for r in reports])
    failed = [r for r in reports if not r.passed]
    lemmas = sorted({r.lemma for r in reports})
    for name in lemmas:
        group = [r for r in reports if r.lemma == name]
        print(f"{name}: {sum(r.passed for r in group)}/{len(group)} passed, "
              f"min margin {min(r.margin for r in group):.3e}")
    for r in failed:
        print(f"FAILED {r.lemma} {r.instance} lhs={r.lhs!r} rhs={r.rhs!r}")
    return MISMATCH if failed else OK


# ---------------------------------------------------------------- oracle ---

ORACLE_COLUMNS = ["model", "seed", "method", "value", "pre_rounding"]


def cmd_oracle(cfg: RunConfig, out: Path, workers: int = 1) -> int:
    rows = []
    for s in _seeds_for(cfg):
        model = cfg.model(s)
        inv = model_invariant(model, cfg.get("localizer", "ell"), cfg.get("oracle", "nk"),
                              cfg.get("oracle", "margin"))
        rows.append([model.label(), s, inv.method, inv.value, inv.pre_rounding])
        print(f"{model.label()} {inv.method}={inv.value} (raw {inv.pre_rounding:.12g})")
    write_csv(out / "oracle.csv", ORACLE_COLUMNS, rows)
    return OK


# ------------------------------------------------------------------ dump ---

def cmd_dump(cfg: RunConfig, out: Path, workers: int = 1) -> int:
    what, kappa = cfg.get("dump", "what"), cfg.get("dump", "kappa")
    model = cfg.model()
    spec = cfg.spec(model, kappa)
    if what == "trajectories":
        sw = cfg.sections["sweep"]
        path = localizer_path(spec, np.linspace(sw["kappa_min"], sw["kappa_max"], sw["points"]))
        with open(out / "trajectories.csv", "w", newline="") as fh:
            write_trajectories(path, fh)
        print(f"wrote {out / 'trajectories.csv'}")
        return OK
    if what == "hamiltonian":
        op = model.build(enumerate_box(model.d, spec.ell), disorder_ell=spec.ell)
    elif what == "surrogate":
        op = build_infinite_surrogate(spec)
    else:
        op = build_localizer(spec)
    target = out / f"{what}.txt"
    dump_operator(op, target)
    print(f"wrote {target} (dimension {op.dim})")
    return OK


COMMANDS = {"sig": cmd_sig, "sweep": cmd_sweep, "phase": cmd_phase,
            "verify-bounds": cmd_verify, "oracle": cmd_oracle, "dump": cmd_dump}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI config file")
    common.add_argument("--workers", type=int, default=1, help="worker processes")
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--seed", type=int, help="override [model] seeds with one seed")
    p = argparse.ArgumentParser(prog="speclocalizer", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=fn.__name__.replace("cmd_", ""))
    return p


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE if exc.code else OK
    try:
        if args.workers < 1:
            raise ConfigError("--workers must be >= 1")
        cfg = load_config(args.config, args.seed)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](cfg, out, args.workers)
    except (ConfigError, BoundError, LocalizerError, OperatorError, InvariantError,
            FlowError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
