"""Command-line front end: g2 tables, gain/mode sweeps, Monte Carlo runs, checks.

Verbs:
    g2-table     closed-form vs state-derived intensity correlations (CSV)
    sweep-gain   normalized noise R versus OPA power gain (CSV)
    sweep-modes  normalized noise R versus joint-measurement mode count (CSV)
    montecarlo   detection-run estimate of R with standard error (CSV)
    verify       oracle cross-checks; exit code 2 on any failure

Configuration is a flat ``key=value`` text file (``--config``); any key can
be overridden by the flag of the same name.  Keys: mu1_sq, mu2_sq, theta,
M, m, seed_x, eta, noise_var, samples, rng_seed, sweep_min, sweep_max,
sweep_steps.  Exit codes: 0 success, 1 validation error, 2 numerical-check
failure.  Outputs are byte-identical for identical configs and seeds.

In sweep output the R_exact/R_approx_eq5 columns are the lossless theory
curves; the Monte Carlo columns emulate the measurement and therefore
include the configured detection efficiency and electronic noise.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, fields, replace

import numpy as np

from . import __version__
from .builder import UsuiParams, build_usui_state, closed_form_covariance
from .fock import fock_usui_expectations
from .montecarlo import (
    DetectorConfig,
    analytic_snl,
    group_and_normalize,
    simulate_detection_run,
)
from .photon_stats import (
    TABLE_PAIR_LABELS,
    closed_form_k,
    g2_table_from_state,
    g2_table_reference,
    intensity_covariance,
    photon_statistics,
)
from .squeezing import (
    combination_spec,
    normalized_noise,
    rd_closed_form,
    rd_high_gain_approx,
    to_db,
)


@dataclass
class RunConfig:
    """Numeric configuration shared by all verbs."""

    mu1_sq: float = 10.0
    mu2_sq: float = 10.0
    theta: float = 0.0
    M: int = 6
    m: int = 0
    seed_x: float = 1e6
    eta: float = 1.0
    noise_var: float = 0.0
    samples: int = 250_000
    rng_seed: int = 1

    def validate(self):
        checks = [
            ("mu1_sq", self.mu1_sq >= 1.0, ">= 1"),
            ("mu2_sq", self.mu2_sq >= 1.0, ">= 1"),
            ("M", self.M >= 2 and self.M % 2 == 0, "a positive even integer"),
            ("m", self.m >= 0, ">= 0"),
            ("seed_x", self.seed_x >= 0.0, ">= 0"),
            ("eta", 0.0 <= self.eta <= 1.0, "in [0, 1]"),
            ("noise_var", self.noise_var >= 0.0, ">= 0"),
            ("samples", self.samples >= 1, ">= 1"),
        ]
        for key, ok, requirement in checks:
            if not ok:
                raise ConfigError(f"config key '{key}' must be {requirement}, "
                                  f"got {getattr(self, key)}")

    def params(self, n_modes=None, seed_x=None):
        return UsuiParams.from_power_gains(
            self.mu1_sq, self.mu2_sq, self.theta,
            self.M if n_modes is None else n_modes,
            self.seed_x if seed_x is None else seed_x,
        )

    def detector(self):
        return DetectorConfig(self.eta, self.noise_var, self.samples, self.rng_seed)


class ConfigError(ValueError):
    pass


class CheckFailure(RuntimeError):
    pass


_INT_KEYS = {"M", "m", "samples", "rng_seed", "sweep_steps"}
_SWEEP_KEYS = {"sweep_min", "sweep_max", "sweep_steps"}


def parse_config_file(path):
    """Read a flat key=value file; '#' starts a comment."""
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw!r}")
            key, _, text = line.partition("=")
            key = key.strip()
            if key not in {f.name for f in fields(RunConfig)} | _SWEEP_KEYS:
                raise ConfigError(f"{path}:{lineno}: unknown config key '{key}'")
            try:
                values[key] = int(text) if key in _INT_KEYS else float(text)
            except ValueError:
                raise ConfigError(
                    f"{path}:{lineno}: config key '{key}' has non-numeric value {text.strip()!r}"
                ) from None
    return values


def _fmt(value):
    if value is None or value == "":
        return ""
    return f"{value:.12g}"


def _write_csv(path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) if not isinstance(v, str) else v for v in row))
    text = "\n".join(lines) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


# --- verbs -----------------------------------------------------------------

def cmd_g2_table(config: RunConfig, out_path):
    params = config.params(n_modes=max(config.M, 10), seed_x=0.0)
    reference = g2_table_reference(params)
    state_table = g2_table_from_state(build_usui_state(params))
    rows = []
    for label in TABLE_PAIR_LABELS:
        ref = reference[label]
        got = state_table[label]
        rows.append((label, got, ref, abs(got - ref)))
    _write_csv(out_path, ("pair_label", "g2_state", "g2_closed_form", "abs_diff"), rows)
    return 0


def _sweep_rows(config: RunConfig, axis_values, vary, montecarlo):
    rows = []
    for value in axis_values:
        if vary == "gain":
            cfg = replace(config, mu1_sq=float(value), mu2_sq=float(value))
            M = config.M
        else:
            cfg = config
            M = int(value)
        params = cfg.params(n_modes=M)
        spec = combination_spec(M, cfg.m)
        if cfg.m == 0:
            r_exact = rd_closed_form(params, M)
            r_approx = rd_high_gain_approx(params, M)
        else:
            # shifted pairings have no closed form; evaluate w K w^T on the
            # seeded state over the window that holds the shifted idlers
            window = params.with_modes(spec.weights.size)
            r_exact = normalized_noise(
                photon_statistics(build_usui_state(window)), spec
            )
            r_approx = ""
        r_mc, stderr = "", ""
        if montecarlo:
            det = cfg.detector()
            record = simulate_detection_run(params, spec, det)
            r_mc, stderr = group_and_normalize(
                record, M // 2, analytic_snl(params, spec, det)
            )
        rows.append((value, r_exact, r_approx, to_db(r_exact), r_mc, stderr))
    return rows


_SWEEP_HEADER = ("x", "R_exact", "R_approx_eq5", "R_dB", "R_montecarlo", "stderr")


def cmd_sweep_gain(config: RunConfig, sweep, out_path, montecarlo=False):
    lo, hi, steps = sweep
    if not (lo >= 1.0 and hi >= lo and steps >= 1):
        raise ConfigError("config keys 'sweep_min'/'sweep_max'/'sweep_steps' must "
                          "describe a gain grid with 1 <= min <= max and steps >= 1")
    grid = np.linspace(lo, hi, int(steps))
    _write_csv(out_path, _SWEEP_HEADER,
               _sweep_rows(config, grid, "gain", montecarlo))
    return 0


def cmd_sweep_modes(config: RunConfig, sweep, out_path, montecarlo=False):
    lo, hi, _ = sweep
    lo, hi = int(lo), int(hi)
    if not (lo >= 2 and lo % 2 == 0 and hi >= lo):
        raise ConfigError("config keys 'sweep_min'/'sweep_max' must give an even "
                          "mode-count range with 2 <= min <= max")
    grid = list(range(lo, hi + 1, 2))
    _write_csv(out_path, _SWEEP_HEADER,
               _sweep_rows(config, grid, "modes", montecarlo))
    return 0


def cmd_montecarlo(config: RunConfig, out_path, record_path=None):
    if config.seed_x <= 0.0:
        raise ConfigError("config key 'seed_x' must be > 0 for a montecarlo run")
    params = config.params()
    spec = combination_spec(config.M, config.m)
    det = config.detector()
    record = simulate_detection_run(params, spec, det)
    r, stderr = group_and_normalize(record, config.M // 2,
                                    analytic_snl(params, spec, det))
    _write_csv(out_path, ("M", "R", "stderr", "R_dB"),
               [(config.M, r, stderr, to_db(r))])
    if record_path:
        _write_csv(record_path, ("slot_index", "e_value"),
                   list(enumerate(record.values)))
    return 0


def cmd_verify(config: RunConfig, tol=1e-9, fock=True, deep_fock=False, out=None):
    """Run the oracle cross-checks, reporting one line per check.

    Raises CheckFailure (exit code 2) after running everything if any
    check violated its bound.
    """
    out = sys.stdout if out is None else out
    rng = np.random.default_rng(config.rng_seed)
    failures = []

    def check(name, value, bound):
        ok = value < bound
        out.write(f"{'ok  ' if ok else 'FAIL'} {name}: {value:.3e} (bound {bound:.1e})\n")
        if not ok:
            failures.append(name)

    # builder vs closed-form covariance
    worst = 0.0
    for _ in range(10):
        for M in (2, 6, 12):
            params = UsuiParams.from_power_gains(
                1.0 + 20.0 * rng.random(), 1.0 + 20.0 * rng.random(),
                2.0 * np.pi * rng.random(), M)
            state = build_usui_state(params)
            A, B = closed_form_covariance(params)
            worst = max(worst, np.abs(state.A - A).max(), np.abs(state.B - B).max())
    check("builder-vs-closed-form covariance", worst, tol)

    # photon-number covariance oracle
    worst = 0.0
    for _ in range(10):
        params = UsuiParams.from_power_gains(
            1.0 + 20.0 * rng.random(), 1.0 + 20.0 * rng.random(),
            2.0 * np.pi * rng.random(), 8)
        K_state = intensity_covariance(build_usui_state(params))
        worst = max(worst, np.abs(K_state - closed_form_k(params)).max())
    check("intensity-covariance oracle", worst, tol)

    # g2 table oracle
    worst = 0.0
    for mu1_sq, mu2_sq in ((10.0, 10.0), (10.0, 1.0), (2.0, 5.0)):
        params = UsuiParams.from_power_gains(mu1_sq, mu2_sq, 0.0, 10)
        ref = g2_table_reference(params)
        got = g2_table_from_state(build_usui_state(params))
        worst = max(worst, max(abs(got[k] - ref[k]) for k in ref))
    check("g2-table oracle", worst, tol)

    # seeded noise oracle (closed form holds at the theta = 0 lock point)
    params = UsuiParams.from_power_gains(config.mu1_sq, config.mu2_sq, 0.0,
                                         12, seed_x=1e6)
    stats = photon_statistics(build_usui_state(params))
    r_num = normalized_noise(stats, combination_spec(12, 0))
    r_ref = rd_closed_form(params, 12)
    check("seeded noise vs closed form (relative)", abs(r_num - r_ref) / r_ref, 1e-6)

    if fock:
        fock_M = 6 if deep_fock else 2
        params = UsuiParams.from_power_gains(1.05, 1.05, 0.0, fock_M)
        f_stats, f_g2, leak = fock_usui_expectations(params, cutoff=4)
        g_state = build_usui_state(params)
        g_stats = photon_statistics(g_state)
        bound = max(1e-3, 10.0 * leak)
        worst = np.abs(f_stats.mean_n / g_stats.mean_n - 1.0).max()
        worst = max(worst, np.abs(
            (f_stats.cov_k - g_stats.cov_k) / g_stats.cov_k[0, 0]).max())
        check(f"fock oracle (extended {fock_M + 4} modes, relative)", worst, bound)

    if failures:
        raise CheckFailure("verification failed: " + ", ".join(failures))
    out.write("all checks passed\n")
    return 0


# --- argument parsing ------------------------------------------------------

def _add_common(parser):
    parser.add_argument("--config", help="flat key=value config file")
    parser.add_argument("--out", default=None, help="output CSV path (default stdout)")
    for f in fields(RunConfig):
        flag = "--" + f.name.replace("_", "-")
        parser.add_argument(flag, dest=f.name, type=(int if f.name in _INT_KEYS else float))
    for key in sorted(_SWEEP_KEYS):
        parser.add_argument("--" + key.replace("_", "-"), dest=key, type=float)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="usui",
        description="multi-mode intensity-squeezing simulator for a pulse-pumped "
                    "unbalanced SU(1,1) interferometer",
    )
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="verb", required=True)
    for verb in ("g2-table", "sweep-gain", "sweep-modes", "montecarlo", "verify"):
        p = sub.add_parser(verb)
        _add_common(p)
        if verb.startswith("sweep"):
            p.add_argument("--with-montecarlo", action="store_true",
                           help="fill the Monte Carlo columns")
        if verb == "montecarlo":
            p.add_argument("--record-out", default=None,
                           help="also dump the per-slot record CSV here")
        if verb == "verify":
            p.add_argument("--tol", type=float, default=1e-9)
            p.add_argument("--no-fock", action="store_true")
            p.add_argument("--deep-fock", action="store_true",
                           help="run the 10-mode Fock cross-check")
    return parser


def _resolve_config(args):
    values = parse_config_file(args.config) if args.config else {}
    for f in fields(RunConfig):
        override = getattr(args, f.name, None)
        if override is not None:
            values[f.name] = override
    sweep = []
    for key in ("sweep_min", "sweep_max", "sweep_steps"):
        file_value = values.pop(key, None)
        flag_value = getattr(args, key, None)
        sweep.append(file_value if flag_value is None else flag_value)
    config = RunConfig(**values)
    config.validate()
    return config, tuple(sweep)


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        config, sweep = _resolve_config(args)
        if args.verb == "g2-table":
            return cmd_g2_table(config, args.out)
        if args.verb in ("sweep-gain", "sweep-modes"):
            if any(v is None for v in sweep):
                raise ConfigError("sweep verbs need config keys 'sweep_min', "
                                  "'sweep_max' and 'sweep_steps'")
            fn = cmd_sweep_gain if args.verb == "sweep-gain" else cmd_sweep_modes
            return fn(config, sweep, args.out, montecarlo=args.with_montecarlo)
        if args.verb == "montecarlo":
            return cmd_montecarlo(config, args.out, args.record_out)
        if args.verb == "verify":
            return cmd_verify(config, tol=args.tol, fock=not args.no_fock,
                              deep_fock=args.deep_fock)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except CheckFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    raise AssertionError("unreachable verb")


if __name__ == "__main__":
    sys.exit(main())
