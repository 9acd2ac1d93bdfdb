"""Command-line interface.

Configuration comes from an optional JSON file plus flags; flags win. The
field strength is written as {"pi_multiple": x} in files (or "2pi" style on
the command line) because compatibility is arithmetic in nu/pi, and a decimal
would silently break it.

Output contract: the human-readable summary always goes to stdout. The JSON
document (top-level "schema": 1, sorted keys) follows on stdout, or goes to
<output>.json when --output is set; subcommands with tabular artifacts write
<output>.csv next to it, and the report subcommand renders its figures as
<output>_*.png. Identical configuration produces byte-identical JSON.

Exit codes: 0 all checks passed, 1 a check ran and failed, 2 configuration or
usage error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from pathlib import Path

import numpy as np

from .characters import (
    AutomorphicData,
    Character,
    trivial_character,
    weierstrass_character,
)
from .errors import (
    ConfigError,
    NumericError,
    RdqError,
    ResourceError,
    SupportError,
    TruncationError,
)
from .kernels import TruncationPolicy, automorphic_kernel, theta_kernel
from .lattice import Lattice, hexagonal_lattice, square_lattice
from .operators import spectrum_fd
from .verify import closed_dimension, dimension_by_trace, run_all, selberg_matrix

SCHEMA = 1
CHARACTER_KINDS = ("explicit", "trivial", "weierstrass")
_CONFIG_KEYS = frozenset({
    "nu", "lattice", "character", "truncation", "quad_order", "radial_order",
    "grid", "num_eigs", "tolerance", "output", "threads",
})


@dataclasses.dataclass(frozen=True)
class RunConfig:
    """Validated inputs shared by every subcommand."""

    nu: float
    lattice: Lattice
    character: Character
    truncation: float = 1e-10
    quad_order: int = 32
    radial_order: int = 40
    grid: int = 96
    num_eigs: int = 6
    tolerance: float | None = None
    output: Path | None = None
    threads: int = 1

    def __post_init__(self):
        if self.nu <= 0:
            raise ConfigError(f"nu must be positive (got {self.nu:g})")
        if self.truncation <= 0:
            raise ConfigError("truncation must be positive")
        for name in ("quad_order", "radial_order", "grid", "num_eigs", "threads"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be a positive integer")
        if self.tolerance is not None and self.tolerance <= 0:
            raise ConfigError("tolerance must be positive")

    @property
    def data(self) -> AutomorphicData:
        return AutomorphicData(self.nu, self.lattice, self.character)

    @property
    def policy(self) -> TruncationPolicy:
        return TruncationPolicy(tolerance=self.truncation)


def _parse_nu(raw) -> float:
    if isinstance(raw, dict):
        if set(raw) != {"pi_multiple"}:
            raise ConfigError('nu object must have the single key "pi_multiple"')
        return float(raw["pi_multiple"]) * math.pi
    if isinstance(raw, (int, float)):
        return float(raw)
    text = str(raw).strip().lower()
    if text.endswith("pi"):
        head = text[:-2].strip()
        return math.pi * (float(head) if head else 1.0)
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f'nu must be a number or "<x>pi" (got "{raw}")') from None


def _parse_lattice(raw) -> Lattice:
    if isinstance(raw, Lattice):
        return raw
    if isinstance(raw, str):
        name = raw.strip().lower()
        if name == "square":
            return square_lattice()
        if name == "hexagonal":
            return hexagonal_lattice()
        path = Path(raw)
        if not path.exists():
            raise ConfigError(
                f'lattice "{raw}" is not a known name (square, hexagonal) or a file'
            )
        raw = _load_json(path)
    if not isinstance(raw, dict) or "generators" not in raw:
        raise ConfigError('lattice spec must be a name or {"generators": [[[re,im],...],...]}')
    try:
        rows = [[complex(re, im) for re, im in row] for row in raw["generators"]]
        return Lattice(np.array(rows, dtype=complex))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"lattice generators malformed: {exc}") from None


def _parse_character(raw, lat: Lattice) -> Character:
    if isinstance(raw, Character):
        return raw
    if isinstance(raw, str):
        raw = {"kind": raw}
    if not isinstance(raw, dict) or "kind" not in raw:
        raise ConfigError('character spec must be a kind name or {"kind": ...}')
    kind = str(raw["kind"]).strip().lower()
    if kind not in CHARACTER_KINDS:
        supported = ", ".join(CHARACTER_KINDS)
        raise ConfigError(f'unknown character kind "{kind}"; supported kinds: {supported}')
    if kind == "trivial":
        return trivial_character(lat)
    if kind == "weierstrass":
        return weierstrass_character(lat)
    values = raw.get("generator_values")
    if values is None:
        raise ConfigError('character.generator_values is required for kind "explicit"')
    try:
        return Character(np.array([complex(re, im) for re, im in values]))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"character.generator_values malformed: {exc}") from None


def _load_json(path: Path) -> dict:
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    try:
        loaded = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"config parse error in {path} at line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from None
    if not isinstance(loaded, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    return loaded


def parse_config(path=None, **overrides) -> RunConfig:
    """Merge a JSON config file with flag overrides into a RunConfig."""
    merged: dict = {}
    if path is not None:
        merged.update(_load_json(Path(path)))
        unknown = set(merged) - _CONFIG_KEYS
        if unknown:
            raise ConfigError(f"unknown config field: {sorted(unknown)[0]}")
    merged.update({k: v for k, v in overrides.items() if v is not None})

    lattice = _parse_lattice(merged.get("lattice", "square"))
    try:
        character = _parse_character(merged.get("character", "weierstrass"), lattice)
    except ValueError as exc:
        raise ConfigError(f"character: {exc}") from None
    kwargs = {}
    for name in ("truncation", "tolerance"):
        if merged.get(name) is not None:
            kwargs[name] = float(merged[name])
    for name in ("quad_order", "radial_order", "grid", "num_eigs", "threads"):
        if merged.get(name) is not None:
            kwargs[name] = int(merged[name])
    if merged.get("output") is not None:
        kwargs["output"] = Path(merged["output"])
    return RunConfig(nu=_parse_nu(merged.get("nu", "pi")), lattice=lattice,
                     character=character, **kwargs)


# -- artifact plumbing ---------------------------------------------------------


def _jsonable(obj):
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def _emit(cfg: RunConfig, lines: list[str], payload: dict, csv_rows=None) -> None:
    document = json.dumps(payload, sort_keys=True, indent=2, default=_jsonable) + "\n"
    for line in lines:
        print(line)
    if cfg.output is None:
        print()
        sys.stdout.write(document)
        return
    stem = cfg.output.with_suffix("")
    stem.with_suffix(".json").write_text(document)
    if csv_rows is not None:
        text = "\n".join(",".join(str(cell) for cell in row) for row in csv_rows) + "\n"
        stem.with_suffix(".csv").write_text(text)


def _base_payload(cfg: RunConfig, subcommand: str) -> dict:
    lat = cfg.lattice
    return {
        "schema": SCHEMA,
        "subcommand": subcommand,
        "nu_over_pi": cfg.nu / math.pi,
        "lattice": {
            "n": lat.n,
            "generators": [[[g.real, g.imag] for g in row] for row in lat.generators],
            "cell_volume": lat.cell_volume,
        },
        "character": {
            "kind": cfg.character.kind,
            "generator_values": [[v.real, v.imag] for v in cfg.character.generator_values],
        },
        "threads": cfg.threads,
    }


# -- subcommands ---------------------------------------------------------------


def cmd_check(cfg: RunConfig) -> int:
    tolerance = cfg.tolerance if cfg.tolerance is not None else 1e-10
    rdq = cfg.data.rdq
    valid = rdq.max_residual <= tolerance
    lines = [f"valid: {'true' if valid else 'false'}"]
    for v in rdq.violations:
        lines.append(f"violation: generators (u_{v.j + 1}, u_{v.k + 1}) residual {v.residual:.6e}")
    payload = _base_payload(cfg, "check")
    payload.update({
        "valid": valid,
        "max_residual": rdq.max_residual,
        "violations": [{"j": v.j, "k": v.k, "residual": v.residual} for v in rdq.violations],
        "tolerances": {"rdq_residual": tolerance},
    })
    _emit(cfg, lines, payload)
    return 0 if valid else 1


def _parse_level_range(text: str) -> list[int]:
    text = text.strip()
    if ".." in text:
        lo, hi = text.split("..", 1)
        levels = list(range(int(lo), int(hi) + 1))
    else:
        levels = [int(text)]
    if not levels or levels[0] < 0:
        raise ConfigError(f'l range "{text}" must be nonnegative and nonempty')
    return levels


def cmd_dimension(cfg: RunConfig, levels: list[int]) -> int:
    tolerance = cfg.tolerance if cfg.tolerance is not None else 1e-5
    data = cfg.data
    rows = []
    for l in levels:
        value, _ = dimension_by_trace(data, l, order=cfg.quad_order, policy=cfg.policy)
        closed = closed_dimension(data.lattice.n, l, data.nu, data.lattice.cell_volume)
        rel = abs(value - closed) / closed
        rows.append({"l": l, "trace": value, "closed": closed, "rel_error": rel,
                     "passed": rel <= tolerance})
    lines = [f"{'l':>3} {'trace':>20} {'closed':>12} {'rel_error':>12}"]
    for row in rows:
        lines.append(f"{row['l']:>3} {row['trace']:>20.12f} {row['closed']:>12.4f} "
                     f"{row['rel_error']:>12.3e}")
    all_passed = all(row["passed"] for row in rows)
    lines.append(f"all within tolerance: {'true' if all_passed else 'false'}")
    payload = _base_payload(cfg, "dimension")
    payload.update({
        "rows": rows,
        "all_passed": all_passed,
        "tolerances": {"relative_match": tolerance, "truncation": cfg.truncation,
                       "quad_order": cfg.quad_order},
    })
    csv_rows = [["l", "trace", "closed", "rel_error"]]
    csv_rows += [[row["l"], repr(row["trace"]), repr(row["closed"]), repr(row["rel_error"])]
                 for row in rows]
    _emit(cfg, lines, payload, csv_rows)
    return 0 if all_passed else 1


def cmd_kernel(cfg: RunConfig, level: str, samples: int, w0_spec: str | None) -> int:
    data = cfg.data
    data.require_valid("kernel sampling")
    if samples < 2:
        raise ConfigError("samples must be at least 2")
    if w0_spec is None:
        w0 = complex(data.lattice.from_cell_coords([0.5, 0.5])[0])
    else:
        try:
            re, im = (float(part) for part in w0_spec.split(","))
        except ValueError:
            raise ConfigError(f'w0 must be "re,im" (got "{w0_spec}")') from None
        w0 = complex(re, im)
    if level.strip().lower() == "theta":
        level_label = "theta"

        def evaluate(z):
            return theta_kernel(data, z, w0, policy=cfg.policy)
    else:
        l = int(level)
        if l < 0:
            raise ConfigError("level must be nonnegative")
        level_label = str(l)

        def evaluate(z):
            return automorphic_kernel(data, l, z, w0, policy=cfg.policy)
    csv_rows = [["z_re", "z_im", "w_re", "w_im", "K_re", "K_im", "certified_tol"]]
    ts = np.linspace(0.0, 1.0, samples, endpoint=False)
    for t1 in ts:
        for t2 in ts:
            z = complex(data.lattice.from_cell_coords([t1, t2])[0])
            k = evaluate(z)
            csv_rows.append([repr(z.real), repr(z.imag), repr(w0.real), repr(w0.imag),
                             repr(k.real), repr(k.imag), repr(cfg.truncation)])
    lines = [f"sampled {samples * samples} kernel values at level {level_label}, "
             f"certified truncation {cfg.truncation:g}"]
    payload = _base_payload(cfg, "kernel")
    payload.update({
        "level": level_label,
        "w0": [w0.real, w0.imag],
        "sample_count": samples * samples,
        "tolerances": {"truncation": cfg.truncation},
    })
    _emit(cfg, lines, payload, csv_rows)
    return 0


def cmd_selberg(cfg: RunConfig, l_max: int) -> int:
    tolerance = cfg.tolerance if cfg.tolerance is not None else 1e-10
    h = selberg_matrix(cfg.nu, cfg.lattice.n, l_max, cfg.radial_order)
    gap = float(np.max(np.abs(h - np.eye(l_max + 1))))
    passed = gap <= tolerance
    lines = [f"identity gap: {gap:.3e} (tolerance {tolerance:g}): "
             f"{'ok' if passed else 'FAIL'}"]
    payload = _base_payload(cfg, "selberg")
    payload.update({
        "l_max": l_max,
        "radial_order": cfg.radial_order,
        "identity_gap": gap,
        "passed": passed,
        "tolerances": {"identity_gap": tolerance},
    })
    csv_rows = [[repr(x) for x in row] for row in h]
    _emit(cfg, lines, payload, csv_rows)
    return 0 if passed else 1


def cmd_spectrum(cfg: RunConfig) -> int:
    tolerance = cfg.tolerance if cfg.tolerance is not None else 2e-2
    report = spectrum_fd(cfg.data, cfg.grid, count=cfg.num_eigs)
    checked = min(3, len(report.cluster_means))
    passed = True
    lines = []
    for k in range(checked):
        mean = report.cluster_means[k]
        target = report.targets[k]
        size = report.cluster_sizes[k]
        rel = abs(mean - target) / target
        ok = rel <= tolerance and size == report.predicted_multiplicity
        passed = passed and ok
        lines.append(f"cluster {k}: mean {mean:.6f} size {size} target {target:.6f} "
                     f"rel {rel:.2e} {'ok' if ok else 'FAIL'}")
    lines.append(f"estimated discretization error: {report.error_estimate:.3e}")
    payload = _base_payload(cfg, "spectrum")
    payload.update({
        "report": report.to_dict(),
        "passed": passed,
        "tolerances": {"cluster_relative": tolerance},
    })
    _emit(cfg, lines, payload)
    return 0 if passed else 1


def _report_figures(cfg: RunConfig, stem: Path, selberg) -> list[str]:
    from . import figures

    data = cfg.data
    levels = list(range(5))
    traces = []
    closed = []
    for l in levels:
        value, _ = dimension_by_trace(data, l, order=cfg.quad_order, policy=cfg.policy)
        traces.append(value)
        closed.append(closed_dimension(data.lattice.n, l, data.nu, data.lattice.cell_volume))
    written = [figures.dimension_figure(levels, traces, closed,
                                        stem.parent / f"{stem.name}_dimensions.png")]
    written.append(figures.selberg_figure(selberg, stem.parent / f"{stem.name}_selberg.png"))
    spectral = spectrum_fd(data, 96, count=cfg.num_eigs)
    written.append(figures.spectrum_figure(spectral, stem.parent / f"{stem.name}_spectrum.png"))
    w0 = complex(data.lattice.from_cell_coords([0.5, 0.5])[0])
    ts = np.linspace(0.0, 1.0, 41)
    grid = np.array([[data.lattice.from_cell_coords([t1, t2])[0] for t2 in ts] for t1 in ts])
    mags = np.abs(np.array([[theta_kernel(data, z, w0, policy=cfg.policy) for z in row]
                            for row in grid]))
    written.append(figures.kernel_figure(grid.real, grid.imag, mags,
                                         stem.parent / f"{stem.name}_kernel.png"))
    return [str(p) for p in written]


def cmd_report(cfg: RunConfig, render_figures: bool) -> int:
    # the holomorphy refinement check needs both grids in the asymptotic
    # regime, which starts near 64 points per axis
    grid = max(cfg.grid, 128)
    reports = run_all(cfg.data, quad_order=cfg.quad_order, selberg_order=cfg.radial_order,
                      grid=grid, policy=cfg.policy)
    override = cfg.tolerance
    entries = []
    tolerances = {}
    all_passed = True
    width = max(len(r.name) for r in reports)
    lines = [f"{'verification':<{width}}  {'max residual':>13}  {'tolerance':>10}  status"]
    for rep in reports:
        effective = override if override is not None else rep.tolerance
        passed = all(r <= effective for r in rep.residuals)
        all_passed = all_passed and passed
        tolerances[rep.name] = effective
        entry = rep.to_dict()
        entry["effective_tolerance"] = effective
        entry["passed"] = passed
        entries.append(entry)
        worst = max(rep.residuals) if rep.residuals else 0.0
        lines.append(f"{rep.name:<{width}}  {worst:>13.3e}  {effective:>10.2g}  "
                     f"{'ok' if passed else 'FAIL'}")
    lines.append(f"all passed: {'true' if all_passed else 'false'}")
    payload = _base_payload(cfg, "report")
    payload.update({
        "reports": entries,
        "all_passed": all_passed,
        "tolerances": tolerances,
    })
    if render_figures:
        stem = (cfg.output.with_suffix("") if cfg.output is not None
                else Path.cwd() / "report")
        h = selberg_matrix(cfg.nu, cfg.lattice.n, 6, cfg.radial_order)
        figure_paths = _report_figures(cfg, stem, h)
        payload["figures"] = figure_paths
        lines.append("figures: " + ", ".join(figure_paths))
    _emit(cfg, lines, payload)
    return 0 if all_passed else 1


# -- dispatch ------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="magtorus",
        description="Spectral theory of the magnetic Laplacian on twisted torus sections.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config file; flags override its fields")
        p.add_argument("--nu", help='field strength: a number or "<x>pi", e.g. "2pi"')
        p.add_argument("--lattice", help="square, hexagonal, or a JSON generator file")
        p.add_argument("--character", help="character kind: " + ", ".join(CHARACTER_KINDS))
        p.add_argument("--truncation", type=float, help="kernel tail tolerance (default 1e-10)")
        p.add_argument("--quad-order", type=int, dest="quad_order",
                       help="cell quadrature order per axis (default 32)")
        p.add_argument("--radial-order", type=int, dest="radial_order",
                       help="radial quadrature order (default 40)")
        p.add_argument("--tolerance", type=float,
                       help="verdict tolerance override, recorded in the output")
        p.add_argument("--output", help="artifact stem; writes <stem>.json and friends")
        p.add_argument("--threads", type=int, help="reduction threads (orchestration is serial)")

    common(sub.add_parser("check", help="validate the compatibility condition"))

    p = sub.add_parser("dimension", help="eigenspace dimensions: trace vs closed formula")
    common(p)
    p.add_argument("--l", default="0..4", help='level or range, e.g. "0..4" (default)')

    p = sub.add_parser("kernel", help="sample a reproducing kernel over the cell")
    common(p)
    p.add_argument("--level", default="0", help='eigenspace level or "theta" (default 0)')
    p.add_argument("--samples", type=int, default=24, help="samples per axis (default 24)")
    p.add_argument("--w0", help='kernel base point "re,im" (default cell center)')

    p = sub.add_parser("selberg", help="radial-transform eigenvalue matrix")
    common(p)
    p.add_argument("--l-max", type=int, default=6, dest="l_max",
                   help="largest level in the matrix (default 6)")

    p = sub.add_parser("spectrum", help="finite-difference spectral cross-check")
    common(p)
    p.add_argument("--grid", type=int, help="grid points per axis (default 96)")
    p.add_argument("--num-eigs", type=int, dest="num_eigs",
                   help="eigenvalues to compute (default 6)")

    p = sub.add_parser("report", help="full verification suite with figures")
    common(p)
    p.add_argument("--grid", type=int,
                   help="grid for the holomorphy check (default 128, the floor)")
    p.add_argument("--figures", default=True, action=argparse.BooleanOptionalAction,
                   help="render figures next to the output (default on)")
    return parser


_USAGE_ERRORS = (ConfigError, RdqError, SupportError)
_NUMERIC_ERRORS = (NumericError, TruncationError, ResourceError, OverflowError)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        overrides = {name: getattr(args, name, None)
                     for name in ("nu", "lattice", "character", "truncation", "quad_order",
                                  "radial_order", "grid", "num_eigs", "tolerance", "output",
                                  "threads")}
        cfg = parse_config(args.config, **overrides)
        if args.subcommand == "check":
            return cmd_check(cfg)
        if args.subcommand == "dimension":
            return cmd_dimension(cfg, _parse_level_range(args.l))
        if args.subcommand == "kernel":
            return cmd_kernel(cfg, args.level, args.samples, args.w0)
        if args.subcommand == "selberg":
            return cmd_selberg(cfg, args.l_max)
        if args.subcommand == "spectrum":
            return cmd_spectrum(cfg)
        return cmd_report(cfg, args.figures)
    except _USAGE_ERRORS as exc:
        _print_error(exc)
        return 2
    except _NUMERIC_ERRORS as exc:
        _print_error(exc)
        return 3


def _print_error(exc: Exception) -> None:
    record = {"error": {"type": type(exc).__name__, "message": str(exc)}}
    print(json.dumps(record, sort_keys=True), file=sys.stderr)


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_main()
