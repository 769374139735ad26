"""Config parsing, pipelines and deterministic CSV / JSON-lines reports.

A config is a flat ``key = value`` file; ``#`` starts a comment.  Example::

    maps = [[[2,0,0,0,0,0,0,0,0], [1]], [[3,0,0,0,0,0,0,0,0], [1]]]
    point = [1, 1]
    X = [ln(3), 7, 20.5]

``maps`` holds ``[numerator, denominator]`` integer coefficient lists, highest
degree first.  Cutoffs are numbers or ``ln(p)`` / ``ln(p/q)``, the latter
compared exactly against integer coordinates.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys
from dataclasses import dataclass, field
from fractions import Fraction

from . import __version__
from .errors import InvalidInputError, ResourceLimitError
from .orbit_engine import (
    DEFAULT_BUDGET,
    SemigroupSystem,
    as_cutoff,
    estimate_beta,
    is_preperiodic,
    log_cutoff,
    orbit_census,
    predict_function_count,
    word_str,
)
from .p1_arith import RationalMapQ, check_generic_set, critical_values, point
from .weight_census import (
    WeightVector,
    acyclic_constant,
    classify,
    count_exact,
    cyclic_counts,
    cyclic_growth,
    solve_rho,
)

MODES = ("rho", "count-words", "constants", "classify", "crit-check", "preperiodic", "orbit-census", "beta", "predict", "theta")
KEYS = ("mode", "maps", "degrees", "point", "X", "tol", "budget", "n_max", "assume_free", "include_identity")
DETERMINISM = "exact integer arithmetic with fixed word order; no randomness; output is byte-identical across runs"

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_BUDGET = 3


class ConfigError(InvalidInputError):
    pass


@dataclass(frozen=True)
class SystemConfig:
    mode: str | None = None
    maps: tuple | None = None  # ((num, den), ...) as integer tuples
    degrees: tuple[int, ...] | None = None
    point: tuple[int, int] | None = None
    X: tuple | None = None  # ints, floats or ("ln", Fraction)
    tol: float = 1e-12
    budget: int = DEFAULT_BUDGET
    n_max: int = 10
    assume_free: bool = False
    include_identity: bool = True

    def system(self) -> SemigroupSystem:
        if not self.maps:
            raise ConfigError("field maps: required for this mode")
        return SemigroupSystem(tuple(RationalMapQ.from_coefficients(num, den) for num, den in self.maps))

    def weights(self) -> WeightVector:
        if self.degrees is not None:
            return WeightVector(self.degrees)
        if self.maps:
            return self.system().degrees
        raise ConfigError("field degrees: required (or give maps)")

    def base_point(self):
        if self.point is None:
            raise ConfigError("field point: required for this mode")
        return point(self.point)

    def cutoffs(self):
        if not self.X:
            raise ConfigError("field X: required for this mode")
        return [_cutoff(x) for x in self.X]

    def echo(self) -> str:
        """Config text that parses back to this object."""
        lines = []
        if self.mode is not None:
            lines.append(f"mode = {self.mode}")
        if self.maps is not None:
            lines.append("maps = " + json.dumps([[list(n), list(d)] for n, d in self.maps], separators=(",", ":")))
        if self.degrees is not None:
            lines.append("degrees = " + json.dumps(list(self.degrees), separators=(",", ":")))
        if self.point is not None:
            lines.append(f"point = [{self.point[0]},{self.point[1]}]")
        if self.X is not None:
            lines.append("X = [" + ",".join(_x_str(x) for x in self.X) + "]")
        lines.append(f"tol = {self.tol!r}")
        lines.append(f"budget = {self.budget}")
        lines.append(f"n_max = {self.n_max}")
        lines.append(f"assume_free = {str(self.assume_free).lower()}")
        lines.append(f"include_identity = {str(self.include_identity).lower()}")
        return "\n".join(lines) + "\n"


def _x_str(x) -> str:
    if isinstance(x, tuple):
        return f"ln({x[1]})"
    return repr(x)


def _cutoff(x):
    if isinstance(x, tuple):
        return log_cutoff(x[1])
    return as_cutoff(x)


_LN = re.compile(r"^ln\(\s*(\d+)\s*(?:/\s*(\d+)\s*)?\)$")
_INT = re.compile(r"^[+-]?\d+$")


def _parse_x_token(tok: str):
    tok = tok.strip()
    m = _LN.match(tok)
    if m:
        bound = Fraction(int(m.group(1)), int(m.group(2) or 1))
        if bound <= 1:
            raise ValueError(f"ln({bound}) is not positive")
        return ("ln", bound)
    if _INT.match(tok):
        return int(tok)
    value = float(tok)
    if not math.isfinite(value):
        raise ValueError(f"{tok} is not finite")
    return value


def _int_list(value, what):
    if not isinstance(value, list) or not value or not all(isinstance(v, int) and not isinstance(v, bool) for v in value):
        raise ValueError(f"{what} must be a non-empty list of integers")
    return tuple(value)


def _parse_value(key: str, raw: str):
    if key == "mode":
        if raw not in MODES:
            raise ValueError(f"unknown mode {raw!r}; expected one of {', '.join(MODES)}")
        return raw
    if key == "X":
        body = raw[1:-1] if raw.startswith("[") and raw.endswith("]") else raw
        toks = [t for t in body.split(",") if t.strip()]
        if not toks:
            raise ValueError("empty cutoff list")
        return tuple(_parse_x_token(t) for t in toks)
    if key in ("assume_free", "include_identity"):
        if raw.lower() not in ("true", "false"):
            raise ValueError("expected true or false")
        return raw.lower() == "true"
    value = json.loads(raw)
    if key == "maps":
        if not isinstance(value, list) or not value:
            raise ValueError("maps must be a non-empty list of [numerator, denominator] pairs")
        out = []
        for k, pair in enumerate(value):
            if not isinstance(pair, list) or len(pair) != 2:
                raise ValueError(f"map {k + 1}: expected [numerator, denominator]")
            out.append((_int_list(pair[0], f"map {k + 1} numerator"), _int_list(pair[1], f"map {k + 1} denominator")))
        return tuple(out)
    if key == "degrees":
        return _int_list(value, "degrees")
    if key == "point":
        if isinstance(value, int) and not isinstance(value, bool):
            return (value, 1)
        pt = _int_list(value, "point")
        if len(pt) != 2:
            raise ValueError("point must be [x, y]")
        return pt
    if key == "tol":
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not value > 0:
            raise ValueError("tol must be a positive number")
        return float(value)
    if key in ("budget", "n_max"):
        if isinstance(value, bool) or not isinstance(value, int) or value < 1:
            raise ValueError(f"{key} must be a positive integer")
        return value
    raise ValueError(f"unknown key {key!r}")


def parse_config(text: str) -> SystemConfig:
    fields = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"line {lineno}, field {key}: unknown key")
        if key in fields:
            raise ConfigError(f"line {lineno}, field {key}: duplicate key")
        try:
            fields[key] = _parse_value(key, raw)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"line {lineno}, field {key}: {exc}") from None
    cfg = SystemConfig(**fields)
    try:
        if cfg.maps is not None:
            system = cfg.system()
            if cfg.degrees is not None and tuple(cfg.degrees) != system.degrees.d:
                raise ConfigError(f"field degrees: {list(cfg.degrees)} do not match map degrees {list(system.degrees.d)}")
        elif cfg.degrees is not None:
            WeightVector(cfg.degrees)
        if cfg.point is not None:
            point(cfg.point)
    except ConfigError:
        raise
    except InvalidInputError as exc:
        raise ConfigError(f"field {_field_of(exc)}: {exc}") from None
    return cfg


def _field_of(exc) -> str:
    msg = str(exc)
    if "point" in msg or "(0, 0)" in msg:
        return "point"
    if "weight" in msg:
        return "degrees"
    return "maps"


@dataclass
class Table:
    name: str
    columns: tuple[str, ...]
    rows: list[tuple] = field(default_factory=list)


@dataclass
class Report:
    metadata: dict
    tables: list[Table]
    warnings: list[dict]
    budget_exhausted: bool = False

    def table(self, name: str) -> Table:
        return next(t for t in self.tables if t.name == name)


def _warn(warnings, kind, detail):
    warnings.append({"kind": kind, "detail": detail})


def _degrees_str(d) -> str:
    return ";".join(map(str, d))


def _rho_table(cfg, warnings):
    d = cfg.weights()
    g = solve_rho(d, tol=cfg.tol)
    return [Table("rho", ("degrees", "rho", "residual"), [(_degrees_str(d), g.rho, g.residual)])]


def _count_table(cfg, warnings):
    d = cfg.weights()
    cls = classify(d)
    rho = solve_rho(d, tol=cfg.tol).rho if d.r >= 2 else None
    rows = []
    for x in cfg.X or ():
        if not isinstance(x, int) or x < 1:
            raise ConfigError(f"field X: count-words needs integer bounds >= 1, got {_x_str(x)}")
        n = count_exact(d, x, cfg.include_identity)
        if rho is None:
            asym = None
        elif cls.cyclic:
            L = _floor_log(x, cls.base)
            cg = cyclic_growth(d)
            asym = cg.C * cg.theta**-L
            if cfg.include_identity and cyclic_counts(d, L) != n:
                raise AssertionError("cyclic recurrence disagrees with the divisor recurrence")
        else:
            asym = acyclic_constant(d, rho) * x**rho
        rows.append((x, n, asym, n / asym if asym else None))
    if not rows:
        raise ConfigError("field X: required for count-words")
    return [Table("count_words", ("X", "count", "asymptotic", "ratio"), rows)]


def _floor_log(x: int, base: int) -> int:
    L, p = 0, base
    while p <= x:
        L += 1
        p *= base
    return L


def _constants_table(cfg, warnings):
    d = cfg.weights()
    cls = classify(d)
    rho = solve_rho(d, tol=cfg.tol).rho
    if cls.cyclic:
        cg = cyclic_growth(d)
        _warn(warnings, "cyclic-degrees-no-constant", f"degrees {_degrees_str(d)} are {cls}; constant column is C in C*theta^-L")
        row = (_degrees_str(d), str(cls), rho, cg.C, cg.theta)
    else:
        row = (_degrees_str(d), str(cls), rho, acyclic_constant(d, rho), None)
    return [Table("constants", ("degrees", "classification", "rho", "constant", "theta"), [row])]


def _classify_table(cfg, warnings):
    d = cfg.weights()
    cls = classify(d)
    exps = _degrees_str(cls.exponents) if cls.cyclic else None
    return [Table("classify", ("degrees", "classification", "base", "exponents"), [(_degrees_str(d), str(cls), cls.base, exps)])]


def _crit_tables(cfg, warnings):
    S = cfg.system()
    maps_rows = []
    for i, phi in enumerate(S.maps):
        cd = critical_values(phi)
        maps_rows.append((i + 1, str(phi), phi.degree, cd.simple, ";".join(cd.crit_values_description)))
    tables = [Table("crit_maps", ("map", "formula", "degree", "simple", "critical_values"), maps_rows)]
    if S.r >= 2:
        rep = check_generic_set(S.maps)
        pair_rows = [(i + 1, j + 1, sep) for (i, j), sep in sorted(rep.separate.items())]
        tables.append(Table("crit_pairs", ("map_i", "map_j", "separate"), pair_rows))
        tables.append(
            Table(
                "crit_summary",
                ("simple", "separate", "degree_ge_4", "generic"),
                [(rep.critically_simple, rep.critically_separate, rep.degrees_at_least_four, rep.generic)],
            )
        )
    return tables


def _preperiodic_table(cfg, warnings):
    S, P = cfg.system(), cfg.base_point()
    v = is_preperiodic(S, P, cfg.budget)
    f, g = v.witness if v.witness else (None, None)
    return [
        Table(
            "preperiodic",
            ("point", "preperiodic", "f", "g"),
            [(str(P), v.verdict, word_str(f) if f else None, word_str(g) if g else None)],
        )
    ]


def _beta_for_prediction(cfg, S, P, warnings):
    if not cfg.assume_free:
        _warn(warnings, "not-asserted-free", "set assume_free = true to enable predictions")
        return None
    if S.r < 2:
        return None
    cls = classify(S.degrees)
    if cls.cyclic:
        _warn(warnings, "cyclic-degrees-no-constant", f"degrees {_degrees_str(S.degrees)} are {cls}; no prediction")
        return None
    return estimate_beta(S, P, n_max=cfg.n_max, budget=cfg.budget, check_preperiodic=False)


def _orbit_tables(cfg, warnings, with_prediction=True, name="orbit"):
    S, P = cfg.system(), cfg.base_point()
    cuts = sorted(zip(cfg.cutoffs(), (_x_str(x) for x in cfg.X)), key=lambda pair: pair[0].value)
    rho = solve_rho(S.degrees, tol=cfg.tol).rho if S.r >= 2 else None
    partial = False
    try:
        census = orbit_census(S, P, cuts[-1][0], cfg.budget)
    except ResourceLimitError as exc:
        if exc.partial is None:
            raise
        census = exc.partial
        partial = True
        _warn(warnings, "budget-cut", f"{exc}; counts are lower bounds")
    beta = None
    if census.infinite:
        f, g = census.witness
        _warn(warnings, "preperiodic", f"{P} is preperiodic (f={word_str(f)}, g={word_str(g)}); N_funcs is infinite")
    elif with_prediction and not partial:
        beta = _beta_for_prediction(cfg, S, P, warnings)
    rows = []
    for c, label in cuts:
        nf, np_ = census.n_funcs(c), census.n_points(c)
        pred = predict_function_count(S, P, c, beta, assume_free=True) if beta else None
        theta = nf / c.value**rho if rho is not None else None
        rows.append((label, nf, np_, pred, theta))
    tables = [Table(name, ("X", "N_funcs", "N_points", "predicted", "theta"), rows)]
    return tables, partial


def _beta_table(cfg, warnings):
    S, P = cfg.system(), cfg.base_point()
    if is_preperiodic(S, P, cfg.budget):
        _warn(warnings, "preperiodic", f"{P} is preperiodic; beta is undefined")
        return [Table("beta", ("n", "beta_n", "increment", "increment_bound", "tail_bound"), [])]
    if not cfg.assume_free:
        _warn(warnings, "not-asserted-free", "beta sums assume a free semigroup; set assume_free = true to assert it")
    be = estimate_beta(S, P, n_max=cfg.n_max, budget=cfg.budget, check_preperiodic=False)
    incs = dict(be.increments())
    rows = []
    for n, b in enumerate(be.beta_sequence, 1):
        inc = incs.get(n)
        bound = be.increment_bound(n) if inc is not None else None
        tail = be.K * be.C_prime ** (n + 1) / (1 - be.C_prime)
        rows.append((n, b, inc, bound, tail))
    if be.shift_N is None:
        _warn(warnings, "no-escape", f"some branch is still below 2C_S at depth {be.n_max}; tail bound does not apply yet")
    elif be.shift_N > 0:
        _warn(warnings, "shifted-escape", f"all branches exceed 2C_S only from depth {be.shift_N}; bounds apply past it")
    return [
        Table("beta", ("n", "beta_n", "increment", "increment_bound", "tail_bound"), rows),
        Table("beta_constants", ("rho", "K", "C_prime", "shift_N"), [(be.rho, be.K, be.C_prime, be.shift_N)]),
    ]


def _predict_tables(cfg, warnings):
    tables, _ = _orbit_tables(cfg, warnings, with_prediction=True, name="predict")
    t = tables[0]
    t.columns = ("X", "N_funcs", "predicted", "ratio")
    t.rows = [(x, nf, pred, nf / pred if pred else None) for x, nf, _np, pred, _th in t.rows]
    return tables


def _theta_tables(cfg, warnings):
    S = cfg.system()
    if S.r < 2:
        raise ConfigError("field maps: theta needs at least two maps")
    tables, _ = _orbit_tables(cfg, warnings, with_prediction=False, name="theta")
    t = tables[0]
    t.columns = ("X", "N_funcs", "theta")
    t.rows = [(x, nf, th) for x, nf, _np, _pred, th in t.rows]
    return tables


PIPELINES = {
    "rho": _rho_table,
    "count-words": _count_table,
    "constants": _constants_table,
    "classify": _classify_table,
    "crit-check": _crit_tables,
    "preperiodic": _preperiodic_table,
    "orbit-census": lambda cfg, w: _orbit_tables(cfg, w)[0],
    "beta": _beta_table,
    "predict": _predict_tables,
    "theta": _theta_tables,
}


def run(cfg: SystemConfig) -> Report:
    if cfg.mode is None:
        raise ConfigError("field mode: required")
    metadata = {"version": __version__, "mode": cfg.mode, "config": cfg.echo(), "determinism": DETERMINISM}
    warnings: list[dict] = []
    exhausted = False
    try:
        tables = PIPELINES[cfg.mode](cfg, warnings)
    except ResourceLimitError as exc:
        _warn(warnings, "budget-exhausted", str(exc))
        tables = []
        exhausted = True
    if any(w["kind"] == "budget-cut" for w in warnings):
        exhausted = True
    return Report(metadata, tables, warnings, exhausted)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return format(v, ".12g")
    return str(v)


def _json_value(v):
    if isinstance(v, float):
        if not math.isfinite(v):
            return _fmt(v)
        return float(format(v, ".12g"))
    return v


def emit(report: Report, fmt: str = "csv") -> bytes:
    """Serialize a report; identical reports give identical bytes."""
    buf = io.StringIO()
    if fmt == "csv":
        w = csv.writer(buf, lineterminator="\n")
        buf.write("# metadata\n")
        w.writerow(("key", "value"))
        for k in sorted(report.metadata):
            w.writerow((k, report.metadata[k]))
        for t in report.tables:
            buf.write(f"# table {t.name}\n")
            w.writerow(t.columns)
            for row in t.rows:
                w.writerow([_fmt(v) for v in row])
        buf.write("# warnings\n")
        w.writerow(("kind", "detail"))
        for warn in report.warnings:
            w.writerow((warn["kind"], warn["detail"]))
    elif fmt == "jsonl":
        def line(rec):
            buf.write(json.dumps(rec, sort_keys=True) + "\n")

        line({"record": "metadata", **report.metadata})
        for t in report.tables:
            for row in t.rows:
                line({"record": t.name, **{c: _json_value(v) for c, v in zip(t.columns, row)}})
        for warn in report.warnings:
            line({"record": "warning", **warn})
    else:
        raise InvalidInputError(f"unknown format {fmt!r}")
    return buf.getvalue().encode()


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="semiorbit", description="Height counts and orbit censuses for semigroups of rational maps.")
    p.add_argument("command", choices=MODES)
    p.add_argument("--config", required=True, help="key = value config file")
    p.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    p.add_argument("--out", help="write here instead of stdout")
    p.add_argument("--budget", type=int, help="override the config budget")
    p.add_argument("--tol", type=float, help="override the config tolerance")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with open(args.config, encoding="utf-8") as fh:
            cfg = parse_config(fh.read())
        overrides = {"mode": args.command}
        if args.budget is not None:
            if args.budget < 1:
                raise ConfigError("--budget must be positive")
            overrides["budget"] = args.budget
        if args.tol is not None:
            if not args.tol > 0:
                raise ConfigError("--tol must be positive")
            overrides["tol"] = args.tol
        cfg = SystemConfig(**{**cfg.__dict__, **overrides})
        report = run(cfg)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except InvalidInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    data = emit(report, args.format)
    if args.out:
        with open(args.out, "wb") as fh:
            fh.write(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    return EXIT_BUDGET if report.budget_exhausted else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
