"""Command-line driver: stability scans, simulations and CSV output.

Subcommands::

    splitstab catalog
    splitstab scan      --splitting prototype --a 2 --dx 1e-2 --eps-grid 1:1e-6:13
    splitstab simulate  --splitting euler-paper --eps 1e-3 --dx 0.005 --T 0.1 --out run.csv
    splitstab analyze   --splitting prototype --eps 1e-3 --nu 0.5 --kmax 8
    splitstab symbol    --splitting prototype-noncommuting --eps 1e-3 --ntheta 257

Options may also come from a ``key=value`` file given with ``--config``;
flags on the command line take precedence.  Exit codes: 0 success, 2
configuration error, 3 simulation blow-up (output still written), 4
numerical failure.
"""

import argparse
import csv
import io
import math
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import imex, modeq
from .models import CATALOG, characteristic_basis, get_splitting
from .smallmat import EigenConvergenceError, SingularMatrixError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BLOWUP = 3
EXIT_NUMERIC = 4

DEFAULT_EPS_GRID = "1:1e-6:13"


class ConfigError(ValueError):
    """Invalid run configuration; the message names the offending field."""


@dataclass
class RunConfig:
    command: str
    splitting: str = "prototype"
    eps: list = field(default_factory=list)
    a: float = 2.0
    dx: float = None
    nu: float = None
    dt: float = None
    alpha_hat: float = None
    alpha_tilde_rule: str = "zero"
    kmax: int = None
    T: float = 0.1
    out: str = "-"
    mode: int = 2
    init: str = "char"
    ntheta: int = 257
    dps: int = None
    threads: int = 1

    def splitting_obj(self):
        return get_splitting(self.splitting, a=self.a)

    def params(self, sp, eps):
        """SchemeParams at ``eps``; ``dt`` from ``--dt``, ``--nu`` or ``dx/10``."""
        ah, at = modeq.alpha_values(sp, eps, self.alpha_tilde_rule, self.alpha_hat)
        if self.dt is not None:
            dt = self.dt
        elif self.nu is not None:
            dt = self.nu * self.dx / sp.advective_speed
        else:
            dt = self.dx / 10
        return modeq.SchemeParams(self.dx, dt, ah, at)


# -- config parsing --------------------------------------------------------


def parse_eps_grid(text):
    """``lo:hi:n`` -> ``n`` log-spaced values from ``lo`` to ``hi`` (either order)."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"eps-grid: expected lo:hi:n, got {text!r}")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ConfigError(f"eps-grid: cannot parse {text!r}") from None
    if n < 1 or not (0 < lo <= 1 and 0 < hi <= 1):
        raise ConfigError(f"eps-grid: need 0 < lo, hi <= 1 and n >= 1, got {text!r}")
    if n == 1:
        return [lo]
    return list(np.logspace(math.log10(lo), math.log10(hi), n))


def parse_eps_list(text):
    try:
        vals = [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"eps: cannot parse {text!r}") from None
    if not vals:
        raise ConfigError("eps: empty list")
    return vals


def read_config_file(path):
    """Plain ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path!r} ({exc.strerror})") from None
    for lineno, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config: line {lineno} of {path!r} is not key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


_FLOAT_KEYS = ("a", "dx", "nu", "dt", "alpha_hat", "T")
_INT_KEYS = ("kmax", "mode", "ntheta", "dps")
_STR_KEYS = ("splitting", "alpha_tilde_rule", "out", "init")
_FILE_KEYS = set(_FLOAT_KEYS + _INT_KEYS + _STR_KEYS + ("eps", "eps_grid"))


def _coerce(key, value):
    if value is None:
        return None
    try:
        if key in _FLOAT_KEYS:
            return float(value)
        if key in _INT_KEYS:
            return int(value)
    except ValueError:
        raise ConfigError(f"{key.replace('_', '-')}: cannot parse {value!r}") from None
    return value


def build_config(args):
    """Merge defaults, the optional config file and command-line flags, then validate."""
    merged = {}
    if getattr(args, "config", None):
        for key, value in read_config_file(args.config).items():
            if key not in _FILE_KEYS:
                raise ConfigError(f"config: unknown key {key!r}")
            merged[key] = value
    for key in _FILE_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
            # a flag displaces its file-level alternative
            other = {"eps": "eps_grid", "eps_grid": "eps", "nu": "dt", "dt": "nu"}.get(key)
            if other is not None and getattr(args, other, None) is None:
                merged.pop(other, None)

    cfg = RunConfig(command=args.command)
    for key in _FLOAT_KEYS + _INT_KEYS + _STR_KEYS:
        if key in merged:
            setattr(cfg, key, _coerce(key, merged[key]))
    if "eps" in merged:
        cfg.eps = parse_eps_list(merged["eps"])
    elif "eps_grid" in merged:
        cfg.eps = parse_eps_grid(merged["eps_grid"])
    elif cfg.command == "scan":
        cfg.eps = parse_eps_grid(DEFAULT_EPS_GRID)
    else:
        cfg.eps = [1e-3]
    cfg.threads = _thread_cap()
    return validate(cfg)


def _thread_cap():
    raw = os.environ.get("SPLITSTAB_THREADS")
    if raw is None:
        return max(1, min(8, os.cpu_count() or 1))
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"SPLITSTAB_THREADS: expected an integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError(f"SPLITSTAB_THREADS: must be >= 1, got {n}")
    return n


def validate(cfg):
    if cfg.splitting not in CATALOG:
        raise ConfigError(f"splitting: unknown name {cfg.splitting!r}; choose from {sorted(CATALOG)}")
    if not cfg.a > 0:
        raise ConfigError(f"a: must be positive, got {cfg.a}")
    for e in cfg.eps:
        if not (0 < e <= 1):
            raise ConfigError(f"eps: values must lie in (0, 1], got {e}")
        if cfg.splitting == "prototype-noncommuting" and e >= 1:
            raise ConfigError("eps: prototype-noncommuting needs eps < 1")
    if cfg.alpha_tilde_rule not in modeq.ALPHA_TILDE_RULES:
        raise ConfigError(f"alpha-tilde-rule: choose from {modeq.ALPHA_TILDE_RULES}, got {cfg.alpha_tilde_rule!r}")
    if cfg.dx is None:
        cfg.dx = 1 / 200 if cfg.command == "simulate" else 1e-2
    if not (cfg.dx > 0 and math.isfinite(cfg.dx)):
        raise ConfigError(f"dx: must be positive, got {cfg.dx}")
    if cfg.nu is not None and cfg.dt is not None:
        raise ConfigError("nu/dt: give at most one of --nu and --dt")
    if cfg.nu is not None and not cfg.nu > 0:
        raise ConfigError(f"nu: must be positive, got {cfg.nu}")
    if cfg.dt is not None and not cfg.dt > 0:
        raise ConfigError(f"dt: must be positive, got {cfg.dt}")
    if cfg.alpha_hat is not None and not cfg.alpha_hat >= 0:
        raise ConfigError(f"alpha-hat: must be non-negative, got {cfg.alpha_hat}")
    if not cfg.T > 0:
        raise ConfigError(f"T: must be positive, got {cfg.T}")
    if cfg.ntheta < 2:
        raise ConfigError(f"ntheta: need at least 2 angles, got {cfg.ntheta}")
    if cfg.dps is not None and cfg.dps < 15:
        raise ConfigError(f"dps: need at least 15 digits, got {cfg.dps}")
    if cfg.init not in ("char", "zero"):
        raise ConfigError(f"init: choose 'char' or 'zero', got {cfg.init!r}")
    if cfg.command == "simulate":
        J = round(1 / cfg.dx)
        if abs(J * cfg.dx - 1) > 1e-9:
            raise ConfigError(f"dx: simulate needs 1/dx to be an integer, got dx={cfg.dx}")
        if J < 4:
            raise ConfigError(f"dx: simulate needs at least 4 cells, got J={J}")
        if len(cfg.eps) != 1:
            raise ConfigError("eps: simulate takes a single eps value")
        if abs(cfg.mode) >= J / 2:
            raise ConfigError(f"mode: |k|={abs(cfg.mode)} not resolved on J={J} cells")
    if cfg.kmax is None:
        cfg.kmax = 8 if cfg.command == "analyze" else 64
    if cfg.kmax < 1:
        raise ConfigError(f"kmax: must be >= 1, got {cfg.kmax}")
    return cfg


# -- CSV output ------------------------------------------------------------


def _fmt(v):
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return "%.17g" % float(v)


def format_csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def write_output(path, text):
    """Write ``text`` to ``path`` atomically (temp file + rename); ``-`` means stdout."""
    if path in (None, "-"):
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".splitstab-", suffix=".tmp", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="ascii", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def sidecar_path(path):
    root, ext = os.path.splitext(path)
    return f"{root}.l2{ext or '.csv'}"


def _note(msg):
    print(msg, file=sys.stderr)


# -- commands --------------------------------------------------------------


def _scan_row(cfg, sp, eps):
    ah, at = modeq.alpha_values(sp, eps, cfg.alpha_tilde_rule, cfg.alpha_hat)
    nu_max = modeq.max_stable_ratio(sp, eps, cfg.dx, cfg.alpha_tilde_rule, k_max=cfg.kmax, alpha_hat=ah)
    if cfg.splitting == "prototype":
        b = modeq.cfl_bounds(cfg.a, eps, ah, at)
    else:
        b = modeq.CflBounds(math.nan, math.nan, math.nan, math.nan)
    return [eps, nu_max, b.nu1, b.nu2, b.phi, b.psi, ah, at]


def cmd_scan(cfg):
    sp = cfg.splitting_obj()
    with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
        rows = list(pool.map(lambda e: _scan_row(cfg, sp, e), cfg.eps))
    header = ["eps", "nu_max_numeric", "nu1", "nu2", "phi", "psi", "alpha_hat", "alpha_tilde"]
    write_output(cfg.out, format_csv(header, rows))
    return EXIT_OK


def cmd_simulate(cfg):
    sp = cfg.splitting_obj()
    eps = cfg.eps[0]
    grid = imex.Grid(round(1 / cfg.dx))
    p = cfg.params(sp, eps)
    p = replace(p, dx=grid.dx)
    d = sp.matrix(eps).shape[0]
    _, Q = characteristic_basis(sp.system, eps)
    if cfg.init == "zero":
        u0 = imex.GridField(grid, np.zeros((grid.J, d)))
    else:
        coeff = np.zeros(d)
        coeff[0] = 1.0
        u0 = imex.init_fourier(grid, d, [(cfg.mode, coeff)], basis=Q)
    result = imex.run(u0, sp, eps, p, cfg.T)
    w = result.final.characteristic(Q)
    u = result.final.values
    header = ["x"] + [f"u{i + 1}" for i in range(d)] + ["w1"]
    rows = [[x, *u[j], w[j, 0]] for j, x in enumerate(grid.x)]
    write_output(cfg.out, format_csv(header, rows))
    hist = [[n, n * p.dt, v] for n, v in enumerate(result.l2_history)]
    if cfg.out not in (None, "-"):
        write_output(sidecar_path(cfg.out), format_csv(["step", "t", "l2"], hist))
    _note(
        f"{sp.name} eps={eps:g} J={grid.J} dt={p.dt:g} steps={result.steps} "
        f"growth={result.growth:.6g} blew_up={result.blew_up}"
    )
    return EXIT_BLOWUP if result.blew_up else EXIT_OK


def _analyze_rows(cfg, sp, eps):
    p = cfg.params(sp, eps)
    rows = []
    for k in range(1, cfg.kmax + 1):
        spec = modeq.frequency_spectrum(sp, eps, p, k, cfg.dps)
        row = [eps, k]
        for mu in spec.values:
            row += [mu.real, mu.imag]
        if sp.kind == "characteristic":
            row += sorted(modeq.characteristic_real_parts(sp, eps, p, k))
        row.append(spec.max_real)
        rows.append(row)
    return rows


def cmd_analyze(cfg):
    sp = cfg.splitting_obj()
    d = sp.matrix(cfg.eps[0]).shape[0]
    header = ["eps", "k"]
    for i in range(d):
        header += [f"re_mu{i + 1}", f"im_mu{i + 1}"]
    if sp.kind == "characteristic":
        header += [f"closed_re{i + 1}" for i in range(d)]
    header.append("max_re")
    with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
        blocks = list(pool.map(lambda e: _analyze_rows(cfg, sp, e), cfg.eps))
    rows = [r for b in blocks for r in b]
    write_output(cfg.out, format_csv(header, rows))
    worst = max(r[-1] for r in rows)
    _note(f"{sp.name}: max Re mu over k=1..{cfg.kmax} is {worst:.6g}")
    return EXIT_OK


def cmd_symbol(cfg):
    sp = cfg.splitting_obj()
    thetas = np.linspace(0.0, math.pi, cfg.ntheta)
    rows = []
    for eps in cfg.eps:
        p = cfg.params(sp, eps)
        radii = modeq.symbol_radius(sp, eps, p, thetas)
        rows += [[eps, t, r] for t, r in zip(thetas, radii)]
        _note(f"{sp.name} eps={eps:g} dt={p.dt:g}: max spectral radius {radii.max():.12g}")
    write_output(cfg.out, format_csv(["eps", "theta", "radius"], rows))
    return EXIT_OK


def cmd_catalog(cfg):
    rows = []
    for name in sorted(CATALOG):
        sp = get_splitting(name, a=cfg.a)
        rows.append([name, sp.kind, sp.system.dim, sp.description])
    write_output(cfg.out, format_csv(["name", "kind", "dim", "description"], rows))
    return EXIT_OK


COMMANDS = {
    "scan": cmd_scan,
    "simulate": cmd_simulate,
    "analyze": cmd_analyze,
    "symbol": cmd_symbol,
    "catalog": cmd_catalog,
}


# -- argument parsing ------------------------------------------------------


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value file; command-line flags override it")
    common.add_argument("--splitting", help=f"one of {', '.join(sorted(CATALOG))} (default prototype)")
    eps = common.add_mutually_exclusive_group()
    eps.add_argument("--eps", help="eps value or comma-separated list")
    eps.add_argument("--eps-grid", dest="eps_grid", help=f"log-spaced grid lo:hi:n (scan default {DEFAULT_EPS_GRID})")
    common.add_argument("--a", help="slow wave speed of the prototype system (default 2)")
    common.add_argument("--dx", help="cell width (default 1e-2; simulate 1/200)")
    common.add_argument("--nu", help="advective CFL number speed*dt/dx")
    common.add_argument("--dt", help="time step (default dx/10)")
    common.add_argument("--alpha-hat", dest="alpha_hat", help="explicit viscosity (default max|eig A_hat|)")
    common.add_argument(
        "--alpha-tilde-rule", dest="alpha_tilde_rule", choices=modeq.ALPHA_TILDE_RULES, help="implicit viscosity rule"
    )
    common.add_argument("--kmax", help="largest Fourier mode analyzed (default 64; analyze 8)")
    common.add_argument("--T", help="final time for simulate (default 0.1)")
    common.add_argument("--out", help="output CSV path (default stdout)")

    parser = argparse.ArgumentParser(prog="splitstab", description="IMEX flux-splitting stability toolkit")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("catalog", parents=[common], help="list cataloged splittings")
    sub.add_parser("scan", parents=[common], help="bisected CFL limit over an eps grid")
    sim = sub.add_parser("simulate", parents=[common], help="run the IMEX solver")
    sim.add_argument("--mode", help="wavenumber of the initial cosine (default 2)")
    sim.add_argument("--init", choices=("char", "zero"), help="initial data: cosine in w1 (char) or zero")
    ana = sub.add_parser("analyze", parents=[common], help="frequency-matrix spectra per mode")
    ana.add_argument("--dps", help="decimal digits for extended-precision spectra")
    sym = sub.add_parser("symbol", parents=[common], help="spectral radius of the discrete symbol")
    sym.add_argument("--ntheta", help="number of angles on [0, pi] (default 257)")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = build_config(args)
        return COMMANDS[cfg.command](cfg)
    except ConfigError as exc:
        _note(f"splitstab: config error: {exc}")
        return EXIT_CONFIG
    except (EigenConvergenceError, SingularMatrixError, np.linalg.LinAlgError, FloatingPointError) as exc:
        _note(f"splitstab: numerical failure: {exc}")
        return EXIT_NUMERIC
    except ValueError as exc:
        # invalid parameter combinations caught by the library
        _note(f"splitstab: config error: {exc}")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
