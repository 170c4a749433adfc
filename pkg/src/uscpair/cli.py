"""Command line front end.

Subcommands: `run` (one protocol execution, population-history CSV),
`scan` (efficiency versus cavity decay), `spectrum` (eigenvalues and
ground-state virtual-photon amplitudes of the reference system), and
`falsify` (the stray-channel discrimination report).

Every output is a UTF-8 CSV with a `#`-prefixed metadata block carrying
the complete normalized parameter set, so a run is reconstructible from
its output alone.  Outputs contain no timestamps or machine identity:
identical configurations produce identical bytes.  Exit codes: 0
success, 1 usage or configuration error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from typing import Iterable

from .config import ConfigError, load, parse_overrides
from .dynamics import IntegrationError, IntegratorConfig
from .protocol import (
    FalsificationReport,
    ScanPoint,
    efficiency,
    kappa_scan,
    run,
    stray_falsification,
)
from .spectrum import diagonalize_static, virtual_amplitudes

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2

_FALSIFY_KEYS = ("n_max", "rel_tol", "abs_tol", "max_step", "n_samples")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad usage; the contract here is 1
    def error(self, message: str) -> None:  # type: ignore[override]
        raise _UsageError(message)


def _fmt(value: object) -> str:
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def _metadata_block(mapping: dict) -> "list[str]":
    return [f"# {key} = {_fmt(value)}" for key, value in mapping.items()]


def _write_atomic(path: str, lines: Iterable[str]) -> None:
    tmp = path + ".tmp"
    try:
        with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
            for line in lines:
                fh.write(line)
                fh.write("\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _history_lines(history) -> "list[str]":
    lines = _metadata_block(history.metadata)
    names = list(history.populations)
    lines.append(",".join(["time", *names, "trace", "purity", "min_eig"]))
    columns = [history.times]
    columns += [history.populations[name] for name in names]
    columns += [history.trace, history.purity, history.min_eig]
    for row in zip(*columns):
        lines.append(",".join(_fmt(float(x)) for x in row))
    return lines


def _scan_lines(points: "list[ScanPoint]", echo: dict) -> "list[str]":
    meta = {key: value for key, value in echo.items() if key != "kappa"}
    lines = _metadata_block(meta)
    lines.append("kappa_over_omega_c,efficiency,error")
    for point in points:
        eff = "" if point.efficiency is None else _fmt(point.efficiency)
        err = point.error or ""
        if "," in err or "\n" in err:
            err = '"' + err.replace('"', '""') + '"'
        lines.append(f"{_fmt(point.kappa)},{eff},{err}")
    return lines


def _spectrum_lines(system, echo: dict) -> "list[str]":
    es = diagonalize_static(system.without_stray())
    lines = _metadata_block(echo)
    lines.append("record,k,family,family_index,energy,parity,n,amplitude")
    for k in range(es.energies.size):
        family, index = es.labels[k]
        lines.append(
            f"eigenstate,{k},{family},{index},{_fmt(float(es.energies[k]))},"
            f"{_fmt(float(es.parity[k]))},,"
        )
    amps = virtual_amplitudes(es, 0)
    for n, amp in enumerate(amps):
        # ground amplitudes are phase-fixed real; store the real part
        lines.append(f"virtual_amplitude,,,,,,{n},{_fmt(float(amp.real))}")
    return lines


def _falsify_lines(report: FalsificationReport, meta: dict) -> "list[str]":
    lines = _metadata_block(meta)
    lines.append("leg,lam,lam_prime,eg_coupling_form,omega_p,omega_s,efficiency")
    for leg in report.legs:
        lines.append(
            ",".join(
                [
                    leg.name,
                    _fmt(leg.system.lam),
                    _fmt(leg.system.lam_prime),
                    leg.system.eg_coupling_form,
                    _fmt(leg.pulses.omega_p),
                    _fmt(leg.pulses.omega_s),
                    _fmt(leg.efficiency),
                ]
            )
        )
    return lines


def _read_config_file(path: "str | None") -> "str | None":
    if path is None:
        return None
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _add_common(sub: argparse.ArgumentParser, out_required: bool = True) -> None:
    sub.add_argument("--preset", help="named parameter set to start from")
    sub.add_argument("--config", help="path to a key = value configuration file")
    sub.add_argument(
        "--set",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override a single configuration key (repeatable)",
    )
    sub.add_argument("--out", required=out_required, help="output CSV path")


def _build_parser() -> _Parser:
    parser = _Parser(prog="uscpair", description=__doc__.splitlines()[0])
    subs = parser.add_subparsers(dest="command", required=True)

    sub = subs.add_parser("run", help="execute one protocol run")
    _add_common(sub)

    sub = subs.add_parser("scan", help="efficiency versus cavity decay rate")
    _add_common(sub)
    sub.add_argument("--jobs", type=int, default=1, help="concurrent scan processes")

    sub = subs.add_parser("spectrum", help="dump reference eigenvalues and amplitudes")
    _add_common(sub)

    sub = subs.add_parser("falsify", help="stray-channel discrimination report")
    sub.add_argument(
        "--configuration", required=True, choices=("lambda", "vee"), help="drive scheme"
    )
    sub.add_argument(
        "--set",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help=f"override one of: {', '.join(_FALSIFY_KEYS)}",
    )
    sub.add_argument("--out", required=True, help="output CSV path")
    return parser


def _cmd_run(args: argparse.Namespace) -> int:
    cfg = load(args.preset, _read_config_file(args.config), args.set, source=args.config or "<config>")
    history = run(cfg.protocol_run())
    _write_atomic(args.out, _history_lines(history))
    return EXIT_OK


def _cmd_scan(args: argparse.Namespace) -> int:
    cfg = load(args.preset, _read_config_file(args.config), args.set, source=args.config or "<config>")
    if cfg.kappa_grid is None:
        raise ConfigError("scan needs a kappa_grid key (log:lo:hi:n or a comma list)")
    points = kappa_scan(cfg.protocol_run(), cfg.kappa_grid, jobs=args.jobs)
    _write_atomic(args.out, _scan_lines(points, cfg.echo()))
    if any(point.error is not None for point in points):
        failed = sum(point.error is not None for point in points)
        print(f"{failed} of {len(points)} scan points failed", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def _cmd_spectrum(args: argparse.Namespace) -> int:
    cfg = load(
        args.preset,
        _read_config_file(args.config),
        args.set,
        require_pulses=False,
        source=args.config or "<config>",
    )
    _write_atomic(args.out, _spectrum_lines(cfg.system, cfg.echo()))
    return EXIT_OK


def _cmd_falsify(args: argparse.Namespace) -> int:
    overrides = parse_overrides(args.set)
    for key in overrides:
        if key not in _FALSIFY_KEYS:
            raise ConfigError(
                f"falsify accepts only {', '.join(_FALSIFY_KEYS)} overrides, got {key!r}"
            )
    integrator_kwargs = {k: v for k, v in overrides.items() if k != "n_max"}
    integrator = IntegratorConfig(**integrator_kwargs)
    n_max = int(overrides.get("n_max", 20))
    report = stray_falsification(args.configuration, integrator, n_max=n_max)
    meta = {
        "configuration": args.configuration,
        "n_max": n_max,
        "rel_tol": integrator.rel_tol,
        "abs_tol": integrator.abs_tol,
    }
    _write_atomic(args.out, _falsify_lines(report, meta))
    return EXIT_OK


_COMMANDS = {
    "run": _cmd_run,
    "scan": _cmd_scan,
    "spectrum": _cmd_spectrum,
    "falsify": _cmd_falsify,
}


def main(argv: "list[str] | None" = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(f"uscpair: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"uscpair: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"uscpair: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except IntegrationError as exc:
        print(f"uscpair: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"uscpair: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
