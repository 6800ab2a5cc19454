"""Command-line front end.

Every subcommand reads its parameters from defaults, then an optional
key-value config file (``[common]`` plus one section per subcommand), then
flags.  Artifacts are JSON or CSV files stamped with the tool version and a
hash of the resolved configuration; with a fixed seed the bytes are
reproducible.

Exit codes: 0 ok, 2 resonance, 3 band overflow, 4 schedule failure,
5 configuration error, 1 any other library error.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import hashlib
import io
import json
import math
import os
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path

import mpmath
import numpy as np

from . import __version__
from .errors import (
    BandOverflowError,
    ConfigError,
    DivlabError,
    OrderError,
    ParameterError,
    ResonanceError,
    ScheduleError,
)

EXIT_OK, EXIT_ERROR, EXIT_RESONANCE, EXIT_BAND, EXIT_SCHEDULE, EXIT_CONFIG = 0, 1, 2, 3, 4, 5

# ---------------------------------------------------------------------------
# configuration


def _bool(text):
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _complex(text):
    """``0.3+1j``, ``0.3+i`` or ``re,im``."""
    t = str(text).strip().replace(" ", "")
    if "," in t:
        re_, im_ = t.split(",")
        return complex(float(re_), float(im_))
    if t.endswith("i") and not t.endswith("j"):
        t = t[:-1] + "j"
        if t == "j" or t[-2] in "+-":
            t = t[:-1] + "1j"
    return complex(t)


def _choice(*options):
    def conv(text):
        t = str(text).strip()
        if t not in options:
            raise ValueError(f"expected one of {', '.join(options)}")
        return t

    conv.__name__ = "choice"
    return conv


def _multiplier_spec(text):
    from .small_divisors import parse_multiplier

    t = str(text).strip().strip('"').strip("'")
    parse_multiplier(t)
    return t


_REQUIRED = object()

COMMON = {
    "seed": (int, 0),
    "precision": (int, 256),
    "out_dir": (str, "."),
    "json_indent": (int, 2),
}

COMMANDS = {
    "linearize": {
        "alpha": (_multiplier_spec, "golden"),
        "omega": (_complex, "0.3+1j"),
        "mode": (_choice("vertical", "full"), "vertical"),
        "scheme": (_choice("order_by_order", "newton_doubling", "obo", "newton"), "order_by_order"),
        "order": (int, 10),
        "band": (int, 3),
        "amplitude": (float, 0.05),
        "germ": (_choice("random", "linear", "v-only"), "random"),
        "a": (str, ""),
        "b": (str, ""),
        "out": (str, "linearize.json"),
        "divisor_csv": (str, ""),
    },
    "schroeder": {
        "alpha": (_multiplier_spec, "golden"),
        "terms": (str, "2:1"),
        "germ": (str, ""),
        "order": (int, 30),
        "newton": (int, 0),
        "convention": (_choice("phi_psi", "inverse"), "phi_psi"),
        "out": (str, "schroeder.json"),
    },
    "divergence-scan": {
        "alphas": (str, "golden;cf:[0;10,100,10000,100000000]"),
        "terms": (str, "2:1"),
        "germ": (str, ""),
        "order": (int, 150),
        "out": (str, "divergence.csv"),
    },
    "majorant": {
        "kind": (_choice("vertical", "full"), "vertical"),
        "R": (float, 1.0),
        "M": (float, 1.0),
        "Mtilde": (float, 1.0),
        "n": (int, 1),
        "d": (int, 1),
        "C0": (float, 1.0),
        "order": (int, 30),
        "out": (str, "A.json"),
    },
    "eta": {
        "K": (str, _REQUIRED),
        "len": (int, 20),
        "out": (str, "eta.csv"),
    },
    "bruno": {
        "alpha": (_multiplier_spec, "golden"),
        "K": (int, 20),
        "out": (str, "bruno.json"),
    },
    "schedule": {
        "tau": (float, 2.0),
        "Cstar": (float, 61.0),
        "l0": (int, 13),
        "len": (int, 20),
        "find_l0": (_bool, False),
        "rstar": (float, 0.5),
        "lmax": (int, 40),
        "C0": (float, 10.0),
        "C1": (float, 10.0),
        "C2": (float, 10.0),
        "dstar": (_choice("siegel", "exp"), "siegel"),
        "out": (str, "cert.json"),
    },
    "fischer-check": {
        "d": (int, 3),
        "L": (int, 5),
        "cases": (int, 200),
        "out": (str, "fischer.json"),
    },
    "divisors": {
        "alpha": (_multiplier_spec, "golden"),
        "omega": (_complex, "0.3+1j"),
        "nmax": (int, 50),
        "jmax": (int, 10),
        "out": (str, "divisors.csv"),
    },
}


@dataclass
class ExperimentConfig:
    command: str
    params: dict
    seed: int = 0
    precision: int = 256
    out_dir: str = "."
    json_indent: int = 2
    source: dict = field(default_factory=dict)  # key -> "file:line" or "flag"

    def canonical(self):
        """Resolved settings that determine the artifacts (output location excluded)."""
        p = {k: (repr(v) if isinstance(v, complex) else v) for k, v in self.params.items()}
        return {"command": self.command, "params": p, "seed": self.seed, "precision": self.precision}

    @property
    def config_hash(self):
        text = json.dumps(self.canonical(), sort_keys=True)
        return hashlib.sha256(text.encode()).hexdigest()[:16]


def _line_map(text):
    """``(section, key) -> line`` for key-value lines of a config file."""
    out = {}
    section = TOP_SECTION
    for i, raw in enumerate(text.splitlines(), start=1):
        s = raw.strip()
        if not s or s[0] in "#;":
            continue
        if s.startswith("[") and s.endswith("]"):
            section = s[1:-1].strip()
            out.setdefault((section, None), i)
            continue
        for sep in ("=", ":"):
            if sep in s:
                out.setdefault((section, s.split(sep, 1)[0].strip()), i)
                break
    return out


def _convert(schema, key, value, where, line=None):
    conv = schema[key][0]
    try:
        return conv(value)
    except (ValueError, TypeError, ParameterError) as exc:
        raise ConfigError(f"bad value for {key!r} ({where}): {exc}", key=key, line=line) from exc


TOP_SECTION = "__top__"


def _first_content(text):
    for raw in text.splitlines():
        t = raw.strip()
        if t and t[0] not in "#;":
            return t
    return None


def read_config_file(path):
    """Sections of a config file as ``{section: {key: (value, line)}}``."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    cp = configparser.ConfigParser(strict=True, interpolation=None, delimiters=("=", ":"))
    cp.optionxform = str
    # keys above the first header belong to the command being run; they get
    # a synthetic header and reported line numbers are shifted back
    top = _first_content(text)
    body = text if top is not None and top.startswith("[") else f"[{TOP_SECTION}]\n" + text
    shift = 0 if body is text else 1
    try:
        cp.read_string(body, source=str(path))
    except configparser.DuplicateOptionError as exc:
        raise ConfigError(
            f"duplicate key {exc.option!r} at line {exc.lineno - shift}", key=exc.option, line=exc.lineno - shift
        ) from exc
    except configparser.DuplicateSectionError as exc:
        raise ConfigError(f"duplicate section [{exc.section}] at line {exc.lineno - shift}",
                          line=exc.lineno - shift) from exc
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc
    lines = _line_map(text)
    return {sec: {k: (v, lines.get((sec, k))) for k, v in cp.items(sec, raw=True)} for sec in cp.sections()}


def parse_config(command, path=None, flags=None, env=None) -> ExperimentConfig:
    """Resolve defaults, config file and flags for ``command``.

    ``flags`` maps keys to values already given on the command line (None
    means not given).  Unknown keys, bad values and missing required keys
    raise :class:`ConfigError` naming the key and, for file input, the line.
    """
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}", key=command)
    schema = COMMANDS[command]
    flags = flags or {}
    env = os.environ if env is None else env
    common = {k: d for k, (_, d) in COMMON.items()}
    params = {k: d for k, (_, d) in schema.items()}
    source = {}
    if path:
        sections = read_config_file(path)
        for sec, items in sections.items():
            if sec == "common":
                sch = COMMON
            elif sec in COMMANDS or sec == TOP_SECTION:
                sch = COMMANDS[command] if sec == TOP_SECTION else COMMANDS[sec]
            else:
                line = _line_map(Path(path).read_text()).get((sec, None))
                raise ConfigError(f"unknown section [{sec}] at line {line}", key=sec, line=line)
            for key, (value, line) in items.items():
                where = f"{path}:{line}"
                if key not in sch:
                    label = command if sec == TOP_SECTION else sec
                    raise ConfigError(f"unknown key {key!r} in [{label}] at line {line}", key=key, line=line)
                val = _convert(sch, key, value, where, line)
                if sec == "common":
                    common[key] = val
                    source[key] = where
                elif sec in (command, TOP_SECTION):
                    params[key] = val
                    source[key] = where
    for key, value in flags.items():
        if value is None:
            continue
        if key in COMMON:
            common[key] = _convert(COMMON, key, value, "flag")
        elif key in schema:
            params[key] = _convert(schema, key, value, "flag")
        else:
            raise ConfigError(f"unknown key {key!r}", key=key)
        source[key] = "flag"
    if env.get("DIVLAB_OUT_DIR"):
        common["out_dir"] = env["DIVLAB_OUT_DIR"]
        source["out_dir"] = "env"
    for key, value in params.items():
        if value is _REQUIRED:
            raise ConfigError(f"missing required key {key!r}", key=key)
    return ExperimentConfig(command, params, source=source, **common)


# ---------------------------------------------------------------------------
# artifacts


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [_clean(obj.real), _clean(obj.imag)]
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else repr(f)
    return obj


def _out_path(cfg, name):
    p = Path(name)
    if not p.is_absolute():
        p = Path(cfg.out_dir) / p
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


def write_json(cfg, name, result):
    doc = {
        "tool": "divlab",
        "version": __version__,
        "config_hash": cfg.config_hash,
        "config": cfg.canonical(),
        "result": result,
    }
    p = _out_path(cfg, name)
    indent = cfg.json_indent if cfg.json_indent > 0 else None
    p.write_text(json.dumps(_clean(doc), sort_keys=True, indent=indent) + "\n")
    return p


def write_csv(cfg, name, header, rows):
    buf = io.StringIO()
    buf.write(f"# divlab {__version__} config {cfg.config_hash}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in r])
    p = _out_path(cfg, name)
    p.write_text(buf.getvalue())
    return p


# ---------------------------------------------------------------------------
# commands


def _multiplier(cfg, spec):
    from .small_divisors import Multiplier, golden_mean, parse_multiplier

    if spec == "golden":
        return Multiplier.rotation(golden_mean(cfg.precision), label="golden")
    return parse_multiplier(spec)


def _terms(text):
    out = {}
    for part in str(text).split(","):
        if not part.strip():
            continue
        n, c = part.split(":")
        out[int(n)] = _complex(c)
    return out


_SCHEMES = {"obo": "order_by_order", "newton": "newton_doubling"}


def _load_series(path):
    from .series_core import FourierTaylorSeries

    try:
        return FourierTaylorSeries.from_json(Path(path).read_text())
    except (OSError, ValueError, KeyError) as exc:
        raise ConfigError(f"cannot load series {path}: {exc}", key=path) from exc


def _neighborhood_from_files(cfg, lam):
    """``a``/``b`` series files, reframed to order ``N`` on their declared band.

    The band is not widened: an order-``N`` run needs ``J0 N`` and the solver
    reports a band overflow otherwise.
    """
    from . import arnold_model
    from .series_core import DomainSpec, FourierTaylorSeries

    p = cfg.params
    N = p["order"]
    a = _load_series(p["a"]) if p["a"] else None
    b = _load_series(p["b"]) if p["b"] else None
    J = max(s.J for s in (a, b) if s is not None)
    dom = DomainSpec(1.0, 1.0, N, J)
    a = a.reband(dom) if a is not None else FourierTaylorSeries.zeros(dom, 1)
    b = b.reband(dom) if b is not None else None
    return arnold_model.build(lam, p["omega"], a, b, dom)


def _cmd_linearize(cfg):
    from . import arnold_model
    from .small_divisors import build_divisor_table

    p = cfg.params
    lam = _multiplier(cfg, p["alpha"])
    if p["a"] or p["b"]:
        nb = _neighborhood_from_files(cfg, lam)
    else:
        rng = np.random.default_rng(cfg.seed)
        amp = 0.0 if p["germ"] == "linear" else p["amplitude"]
        nb = arnold_model.random_neighborhood(lam, p["omega"], p["order"], p["band"], amp, rng,
                                              v_only=p["germ"] == "v-only")
    if p["mode"] == "vertical":
        res = arnold_model.vertical_linearize(nb, p["order"])
    else:
        res = arnold_model.full_linearize(nb, p["order"], mode=_SCHEMES.get(p["scheme"], p["scheme"]))
    decay = arnold_model.decay_check(res, 0.5, 0.25)
    out = {
        "order_achieved": res.order_achieved,
        "residual_order": arnold_model.residual_order(res),
        "residual_v_max": res.residual_v.max_abs(),
        "residual_h_max": res.residual_h.max_abs(),
        "min_divisors": [[r.n, r.min_divisor] for r in res.per_level],
        "decay": [{"n": d.n, "C_fit": d.C_fit, "worst_j": d.worst_j, "bound": d.bound, "passed": d.passed,
                   "spike": d.spike} for d in decay],
        "g": res.g.to_dict(),
        "residual": res.residual.to_dict(),
        "identity": bool(res.g.h_perturbation.is_zero() and res.g.v_perturbation.is_zero()),
    }
    paths = [write_json(cfg, p["out"], out)]
    if p["divisor_csv"]:
        tab = build_divisor_table(lam, complex(p["omega"]), p["order"], nb.domain.fourier_band)
        rows = [(n, j, tab.entry(n, j)) for n in range(1, tab.max_n + 1) for j in range(-tab.max_j, tab.max_j + 1)]
        paths.append(write_csv(cfg, p["divisor_csv"], ["n", "j", "divisor"], rows))
    return paths


def _germ_terms(p):
    """Germ coefficients from a JSON file ``{"n": c or [re, im]}`` or the ``terms`` string."""
    if not p["germ"]:
        return _terms(p["terms"])
    try:
        data = json.loads(Path(p["germ"]).read_text())
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot load germ {p['germ']}: {exc}", key="germ") from exc
    return {int(n): complex(*c) if isinstance(c, list) else complex(c) for n, c in data.items()}


def _cmd_schroeder(cfg):
    from .onedim import Germ1D, newton_linearize_1d, radius_estimate, root_test_max, schroeder_linearize

    p = cfg.params
    lam = _multiplier(cfg, p["alpha"])
    if p["newton"] > 0:
        N = 2 ** (p["newton"] + 1)
        psi = newton_linearize_1d(Germ1D.from_dict(lam, _germ_terms(p), N), p["newton"])
    else:
        N = p["order"]
        psi = schroeder_linearize(Germ1D.from_dict(lam, _germ_terms(p), N), N, p["convention"])
    out = {
        "order": psi.order,
        "orders_by_pass": list(psi.orders_by_pass),
        "psi": [[n, psi.coeffs[n]] for n in range(1, psi.order + 1)],
        "root_test_max": root_test_max(psi, psi.order),
        "radius_estimate": radius_estimate(psi, (max(2, psi.order // 2), psi.order)) if psi.order >= 2 else None,
    }
    return [write_json(cfg, p["out"], out)]


def _alpha_list(text):
    path = Path(text)
    if path.is_file():
        lines = path.read_text().splitlines()
        return [ln.strip() for ln in lines if ln.strip() and not ln.lstrip().startswith("#")]
    # ';' also separates continued-fraction entries, so only split outside brackets
    return [s.strip() for s in re.split(r";(?![^\[]*\])", text) if s.strip()]


def _cmd_divergence_scan(cfg):
    from .onedim import Germ1D, schroeder_linearize

    p = cfg.params
    N = p["order"]
    rows = []
    for spec in _alpha_list(p["alphas"]):
        lam = _multiplier(cfg, _multiplier_spec(spec))
        psi = schroeder_linearize(Germ1D.from_dict(lam, _germ_terms(p), N), N)
        for n in range(2, psi.order + 1):
            a = abs(psi.coeffs[n])
            rows.append((spec, n, a, a ** (1.0 / n)))
    return [write_csv(cfg, p["out"], ["alpha_label", "n", "abs_psi_n", "root_test"], rows)]


def _cmd_majorant(cfg):
    from .majorant import MajorantParams, radius_lower_bound, replay_defect, solve_full_majorant, solve_vertical_majorant

    p = cfg.params
    mp = MajorantParams(R=p["R"], M=p["M"], M_tilde=p["Mtilde"], n=p["n"], d=p["d"], C0=p["C0"])
    solve = solve_vertical_majorant if p["kind"] == "vertical" else solve_full_majorant
    A = solve(mp, p["order"])
    out = {
        "kind": p["kind"],
        "A": A.A,
        "replay_defect": replay_defect(A),
        "radius_lower_bound": radius_lower_bound(A) if A.length >= 10 else None,
    }
    return [write_json(cfg, p["out"], out)]


def _read_K(path):
    vals = {}
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].lstrip().startswith("#")]
    if rows and not _is_number(rows[0][0]):
        rows = rows[1:]
    for i, r in enumerate(rows):
        if len(r) >= 2:
            vals[int(r[0])] = float(r[1])
        else:
            vals[i + 2] = float(r[0])
    return vals


def _is_number(s):
    try:
        float(s)
        return True
    except ValueError:
        return False


def _cmd_eta(cfg):
    from .majorant import eta_sequence, growth_fit

    p = cfg.params
    try:
        K = _read_K(p["K"])
    except OSError as exc:
        raise ConfigError(f"cannot read K file {p['K']}: {exc}", key="K") from exc
    except ValueError as exc:
        raise ConfigError(f"bad K file {p['K']}: {exc}", key="K") from exc
    M = p["len"]
    missing = [m for m in range(2, M + 1) if m not in K]
    if missing:
        raise ConfigError(f"K file lacks m = {missing[0]}", key="K")
    eta = eta_sequence(K, M)
    rows = [(m, K.get(m, ""), eta.eta[m]) for m in range(1, M + 1)]
    paths = [write_csv(cfg, p["out"], ["m", "K", "eta"], rows)]
    if M >= 4:
        fit = growth_fit(eta)
        print(f"growth: {fit.verdict} L0={fit.L0:.6g} L={fit.L:.6g}")
    return paths


def _cmd_bruno(cfg):
    from .small_divisors import bruno_partial_sums

    p = cfg.params
    lam = _multiplier(cfg, p["alpha"])
    S = bruno_partial_sums(lam, p["K"])
    return [write_json(cfg, p["out"], {"partial_sums": S, "K": p["K"]})]


def _cmd_schedule(cfg):
    from .newton_scheduler import find_l0, make_schedule, siegel_floor, simulate_errors, verify_schedule
    from .small_divisors import DstarSequence

    p = cfg.params
    D = siegel_floor(p["tau"]) if p["dstar"] == "siegel" else DstarSequence.exponential()
    if p["find_l0"]:
        l0, s, cert = find_l0(D, p["Cstar"], p["rstar"], p["lmax"], L=p["len"], C2=p["C2"])
    else:
        s = make_schedule(D, p["Cstar"], p["l0"], p["len"], p["rstar"])
        cert = verify_schedule(s, p["C2"])
    eps0 = 0.5 * simulate_errors(s, 1.0, p["C0"], p["C1"]).required_eps0
    tr = simulate_errors(s, eps0, p["C0"], p["C1"])
    out = {
        "certificate": cert.to_dict(),
        "schedule": {"l0": s.l0, "m": s.m, "delta": s.delta, "theta": s.theta, "r": s.r},
        "errors": {
            "eps0": eps0,
            "log_eps": tr.log_eps,
            "failure_index": tr.failure_index,
            "loglog_slope": tr.loglog_slope(min(8, len(tr.log_eps) - 1)),
        },
    }
    path = write_json(cfg, p["out"], out)
    if not cert.passed:
        raise ScheduleError("schedule certificate failed", diagnostics={"artifact": str(path)})
    return [path]


def _cmd_fischer_check(cfg):
    from .fischer import (
        HomogeneousPoly,
        apply_unitary,
        mf_norm,
        poly_mul,
        random_unitary,
        symmetric_power_matrix,
    )

    p = cfg.params
    rng = np.random.default_rng(cfg.seed)
    d, L = p["d"], p["L"]
    sub = 0.0
    inv = 0.0
    for _ in range(p["cases"]):
        k1, k2 = rng.integers(1, L + 1, size=2)
        f = HomogeneousPoly.random(d, int(k1), rng)
        g = HomogeneousPoly.random(d, int(k2), rng)
        sub = max(sub, mf_norm(poly_mul(f, g)) - mf_norm(f) * mf_norm(g))
        T = random_unitary(d, rng)
        inv = max(inv, abs(mf_norm(apply_unitary(T, f)) - mf_norm(f)))
    unit = 0.0
    for dd in range(1, d + 1):
        T = random_unitary(dd, rng)
        for ll in range(1, L + 1):
            U, _ = symmetric_power_matrix(T, ll)
            unit = max(unit, float(np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0])))))
    out = {"submultiplicativity_excess": sub, "invariance_defect": inv, "unitarity_defect": unit}
    return [write_json(cfg, p["out"], out)]


def _cmd_divisors(cfg):
    from .small_divisors import build_divisor_table

    p = cfg.params
    tab = build_divisor_table(_multiplier(cfg, p["alpha"]), complex(p["omega"]), p["nmax"], p["jmax"])
    rows = [(n, j, tab.entry(n, j)) for n in range(1, p["nmax"] + 1) for j in range(-p["jmax"], p["jmax"] + 1)]
    return [write_csv(cfg, p["out"], ["n", "j", "divisor"], rows)]


_DISPATCH = {
    "linearize": _cmd_linearize,
    "schroeder": _cmd_schroeder,
    "divergence-scan": _cmd_divergence_scan,
    "majorant": _cmd_majorant,
    "eta": _cmd_eta,
    "bruno": _cmd_bruno,
    "schedule": _cmd_schedule,
    "fischer-check": _cmd_fischer_check,
    "divisors": _cmd_divisors,
}


def run_experiment(cfg: ExperimentConfig):
    """Run one configured command; returns ``(exit_code, artifact_paths)``."""
    try:
        with mpmath.workprec(cfg.precision):
            paths = _DISPATCH[cfg.command](cfg)
    except ResonanceError as exc:
        print(f"resonance: {exc}", file=sys.stderr)
        return EXIT_RESONANCE, []
    except BandOverflowError as exc:
        print(f"band overflow: {exc}", file=sys.stderr)
        return EXIT_BAND, []
    except ScheduleError as exc:
        print(f"schedule failure: {exc}", file=sys.stderr)
        return EXIT_SCHEDULE, [exc.diagnostics["artifact"]] if "artifact" in exc.diagnostics else []
    except (ConfigError, ParameterError, OrderError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG, []
    except DivlabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR, []
    return EXIT_OK, paths


# ---------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _flag(key):
    return "--" + key.replace("_", "-")


def build_parser():
    parser = _Parser(prog="divlab", description="Small-divisor linearization experiments.")
    parser.add_argument("--version", action="version", version=f"divlab {__version__}")
    glob = argparse.ArgumentParser(add_help=False)
    for key, (conv, _) in COMMON.items():
        glob.add_argument(_flag(key), dest=key, default=None)
    glob.add_argument("--config", default=None, help="key-value config file")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    for name, schema in COMMANDS.items():
        sp = sub.add_parser(name, parents=[glob])
        for key, (conv, _) in schema.items():
            if conv is _bool:
                sp.add_argument(_flag(key), dest=key, action="store_const", const="true", default=None)
            else:
                sp.add_argument(_flag(key), dest=key, default=None)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
        if not ns.command:
            parser.print_help()
            return EXIT_CONFIG
        flags = {k: v for k, v in vars(ns).items() if k not in ("command", "config")}
        cfg = parse_config(ns.command, ns.config, flags)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    code, paths = run_experiment(cfg)
    for p in paths:
        print(p)
    return code


if __name__ == "__main__":
    sys.exit(main())
