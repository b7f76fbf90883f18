"""Command-line entry point: ``kac-chain-lab <subcommand> [options]``.

Every subcommand prints a CSV (or JSON) report of check rows and exits with
status 0 when all verdicts pass, 1 when some check fails, and 2 on a
configuration or module error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

from . import report, suites
from .action import from_descriptor, torus
from .equidecomp import certificate_to_json, find_equidecomposition, orbit_sums_agree
from .errors import ConfigError, KacLabError
from .odometer import aw_kac_conditions, random_samples
from .poset import check_epodur_box
from .rational import parse_vector
from .returns import IdentityCatalog, IdentityParams, evaluate_identity

SUBCOMMANDS = ("ve-check", "identities", "epodur", "torus-demo", "odometer", "flows", "renewal", "equidecomp")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file with option values (command-line flags win)")
    p.add_argument("--seed", type=int, help="64-bit seed; required by every randomized run")
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--format", choices=("csv", "json"), help="report format (default csv)")
    p.add_argument("--jobs", type=int, help="worker threads (default: $KCL_JOBS or 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kac-chain-lab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("ve-check", help="vertex-expectation sweep over random systems")
    p.add_argument("--random", type=int, help="number of random systems (default 200)")
    p.add_argument("--max-points", type=int, help="largest system size (default 24)")
    p.set_defaults(handler=_ve_check)

    p = sub.add_parser("identities", help="return-time identity catalog")
    p.add_argument("--random", type=int, help="random instances per identity (default 100)")
    p.add_argument("--identity", action="append", help="restrict to this identity (repeatable)")
    p.add_argument("--system", help="system descriptor: JSON file or inline JSON")
    p.add_argument("--params", help="identity parameters as inline JSON, e.g. '{\"E\": [0]}'")
    p.set_defaults(handler=_identities)

    p = sub.add_parser("epodur", help="epoch/duration equalities on tori")
    p.add_argument("--random", type=int, help="random torus instances (default 50)")
    p.add_argument("--max-side", type=int, help="largest torus side (default 6)")
    p.add_argument("--system", help="system descriptor with 'sizes'")
    p.add_argument("--E", help="comma-separated points of E")
    p.add_argument("--H", type=int, help="search box side")
    p.set_defaults(handler=_epodur)

    p = sub.add_parser("torus-demo", help="exact averages for the upper triangle of (Z/n)^2")
    p.add_argument("--n", type=int, help="torus side (default 200)")
    p.set_defaults(handler=_torus_demo)

    p = sub.add_parser("odometer", help="Kac-function conditions on the dyadic odometer")
    p.add_argument("--bases", help="comma-separated tori such as 2x2,4x4 (default)")
    p.add_argument("--depths", "--depth", dest="depths", help="comma-separated depths (default 2,3,4)")
    p.add_argument("--system", "--base", dest="system", help="base system descriptor (use with --E)")
    p.add_argument("--E", help="comma-separated points of E")
    p.add_argument("--exhaustive", action="store_true", default=None,
                   help="enumerate every configuration (the default)")
    p.add_argument("--samples", type=int, help="instead check thickness on this many random samples")
    p.set_defaults(handler=_odometer)

    p = sub.add_parser("flows", help="circle, Helmberg and torus-flow checks")
    p.add_argument("--arcs", type=int, help="random arc unions (default 20)")
    p.add_argument("--circle-samples", type=int, help="Monte-Carlo samples per arc union (default 10000)")
    p.add_argument("--flow-samples", type=int, help="Monte-Carlo samples per torus case (default 100000)")
    p.add_argument("--T", help="window length as a rational (default 5/2)")
    p.set_defaults(handler=_flows)

    p = sub.add_parser("renewal", help="Palm identities and renewal limits")
    p.add_argument("--samples", type=int, help="Monte-Carlo paths per check (default 100000)")
    p.set_defaults(handler=_renewal)

    p = sub.add_parser("equidecomp", help="equidecomposition LPs")
    p.add_argument("--random", type=int, help="random instances (sweep mode)")
    p.add_argument("--max-points", type=int, help="largest system size in sweep mode (default 16)")
    p.add_argument("--system", help="system descriptor for a single problem")
    p.add_argument("--f", help="comma-separated values of f")
    p.add_argument("--g", help="comma-separated values of g")
    p.add_argument("--window", help="group elements separated by ';', coordinates by ','")
    p.set_defaults(handler=_equidecomp)

    for action in sub.choices.values():
        _add_common(action)
    return parser


# ---------------------------------------------------------------------------
# configuration


def _load_config(path: str) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    return data


def _merge_config(args: argparse.Namespace) -> argparse.Namespace:
    if not args.config:
        return args
    data = _load_config(args.config)
    named = data.pop("subcommand", args.subcommand)
    if named != args.subcommand:
        raise ConfigError(f"config is for {named!r}, not {args.subcommand!r}")
    known = set(vars(args)) - {"config", "subcommand", "handler"}
    for key, value in data.items():
        dest = key.replace("-", "_")
        if dest not in known:
            raise ConfigError(f"unknown option {key!r} for {args.subcommand}")
        if getattr(args, dest) is None:
            if isinstance(value, (dict, list)) and dest in ("system", "params"):
                value = json.dumps(value)
            setattr(args, dest, value)
    if args.seed is not None and not isinstance(args.seed, int):
        raise ConfigError("seed must be an integer")
    return args


def _need_seed(args) -> int:
    if args.seed is None:
        raise ConfigError(f"{args.subcommand} draws random numbers, so --seed is required")
    if not 0 <= args.seed < 1 << 64:
        raise ConfigError("seed must fit in 64 unsigned bits")
    return args.seed


def _jobs(args) -> int:
    if args.jobs is not None:
        jobs = args.jobs
    else:
        env = os.environ.get("KCL_JOBS", "1")
        try:
            jobs = int(env)
        except ValueError as exc:
            raise ConfigError(f"KCL_JOBS={env!r} is not an integer") from exc
    if jobs < 1:
        raise ConfigError("jobs must be at least 1")
    return jobs


def _system(text: str):
    if text is None:
        raise ConfigError("--system is required here")
    raw = text.strip()
    try:
        desc = json.loads(raw) if raw.startswith("{") else json.loads(Path(raw).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read system descriptor {raw}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"system descriptor is not valid JSON: {exc}") from exc
    return from_descriptor(desc)


def _points(text) -> frozenset:
    if text is None:
        raise ConfigError("--E is required here")
    if isinstance(text, list):
        return frozenset(int(v) for v in text)
    try:
        return frozenset(int(v) for v in str(text).split(",") if v.strip())
    except ValueError as exc:
        raise ConfigError(f"bad point list {text!r}") from exc


def _ints(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad integer list {text!r}") from exc


def _default(value, fallback):
    return fallback if value is None else value


# ---------------------------------------------------------------------------
# handlers; each returns (rows, extra JSON payload or None)


def _ve_check(args):
    return suites.ve_sweep(_default(args.random, 200), _need_seed(args),
                           _default(args.max_points, 24), _jobs(args)), None


def _identities(args):
    names = args.identity or []
    try:
        chosen = [IdentityCatalog(n.upper()) for n in names] or list(suites.SWEEP_IDENTITIES)
    except ValueError as exc:
        raise ConfigError(f"unknown identity: {exc}") from exc
    if args.system is not None:
        system = _system(args.system)
        try:
            raw = json.loads(args.params or "{}")
        except json.JSONDecodeError as exc:
            raise ConfigError(f"--params is not valid JSON: {exc}") from exc
        params = _identity_params(raw)
        rows = []
        for ident in chosen:
            rep = evaluate_identity(system, params, ident)
            rows.append(report.Row("identity", (ident.value, 0), {"identity": ident.value, **rep.params},
                                   rep.sides, rep.equal))
        return rows, None
    return suites.identity_sweep(_default(args.random, 100), _need_seed(args), chosen, jobs=_jobs(args)), None


def _identity_params(raw: dict) -> IdentityParams:
    allowed = {"E", "E2", "s", "f", "r", "r_inv", "horizon"}
    unknown = set(raw) - allowed
    if unknown:
        raise ConfigError(f"unknown identity parameters {sorted(unknown)}")
    if "E" not in raw:
        raise ConfigError("identity parameters need E")
    out = {"E": frozenset(int(v) for v in raw["E"])}
    if "E2" in raw:
        out["E2"] = frozenset(int(v) for v in raw["E2"])
    for key in ("s", "f"):
        if key in raw:
            out[key] = tuple(Fraction(str(v)) for v in raw[key])
    for key in ("r", "r_inv"):
        if key in raw:
            out[key] = tuple(int(v) for v in raw[key])
    if "horizon" in raw:
        out["horizon"] = int(raw["horizon"])
    return IdentityParams(**out)


def _epodur(args):
    if args.system is not None:
        system = _system(args.system)
        E = _points(args.E)
        H = _default(args.H, 2 * max(system.shape or (system.n_points,)) + 1)
        reports = check_epodur_box(system, E, H)
        rows = [report.Row("epodur.z", tuple(r.params["z"]), r.params, r.sides, r.equal) for r in reports]
        return rows, None
    return suites.epodur_sweep(_default(args.random, 50), _need_seed(args),
                               _default(args.max_side, 6), _jobs(args)), None


def _torus_demo(args):
    return suites.torus_demo(_default(args.n, 200)), None


def _odometer(args):
    depths = _ints(args.depths) if args.depths else [2, 3, 4]
    if args.system is not None:
        system = _system(args.system)
        E = _points(args.E)
        rows = []
        if args.samples is not None and not args.exhaustive:
            seed = _need_seed(args)
            for D in depths:
                smp = random_samples(system, E, D, args.samples, seed)
                thin = [s for s in smp if not s.thick()]
                rows.append(report.Row("odometer.sampled", (D,), {"E": sorted(E), "D": D, "samples": args.samples},
                                       {"thick": len(smp) - len(thin), "mean_card_S": Fraction(
                                           sum(len(s.S) for s in smp), len(smp))}, not thin))
            return rows, None
        for D in depths:
            rep = aw_kac_conditions(system, E, D)
            rows.append(report.Row("odometer", (D,), {"E": sorted(E), "D": D},
                                   {"E_card_S": rep.expect_card_S, "E_phi_d": rep.expect_phi_d,
                                    "coverage": rep.coverage, "thick": rep.thick,
                                    "configurations": rep.configurations},
                                   rep.ok and rep.expect_phi_d <= 2 ** system.d))
        return rows, None
    bases = []
    for token in (args.bases or "2x2,4x4").split(","):
        try:
            bases.append(tuple(int(v) for v in token.lower().split("x")))
        except ValueError as exc:
            raise ConfigError(f"bad torus shape {token!r}") from exc
    for shape in bases:
        torus(shape)  # validates the shape early
    return suites.aw_suite(suites.aw_cases(tuple(bases), tuple(depths)), _jobs(args)), None


def _flows(args):
    T = Fraction(str(args.T)) if args.T is not None else Fraction(5, 2)
    return suites.flows_suite(_need_seed(args), _default(args.arcs, 20), _default(args.circle_samples, 10_000),
                              _default(args.flow_samples, 100_000), T, _jobs(args)), None


def _renewal(args):
    return suites.renewal_suite(_need_seed(args), _default(args.samples, 100_000), _jobs(args)), None


def _window(text):
    if text is None:
        return None
    try:
        return [tuple(int(c) for c in part.split(",")) for part in text.split(";") if part.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad window {text!r}") from exc


def _equidecomp(args):
    if args.system is None:
        return suites.equidecomp_sweep(_default(args.random, 100), _need_seed(args),
                                       _default(args.max_points, 16), _jobs(args)), None
    system = _system(args.system)
    if args.f is None or args.g is None:
        raise ConfigError("--f and --g are required with --system")
    try:
        f, g = parse_vector(str(args.f)), parse_vector(str(args.g))
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"bad function values: {exc}") from exc
    res = find_equidecomposition(system, f, g, _window(args.window))
    payload = certificate_to_json(res)
    oracle = orbit_sums_agree(system, f, g)
    ok = res.check(system, f, g) and ((payload["kind"] == "witness") == oracle or args.window is not None)
    row = report.Row("equidecomp", (0,), {"f": tuple(f), "g": tuple(g)},
                     {"result": payload["kind"], "oracle": "equal-orbit-sums" if oracle else "differ"}, ok)
    return [row], {"result": payload}


# ---------------------------------------------------------------------------


def run(argv=None) -> tuple[int, str, str | None]:
    """Parse ``argv``, dispatch, and return ``(exit status, report text, output path)``."""
    parser = build_parser()
    args = parser.parse_args(argv)
    args = _merge_config(args)
    rows, extra = args.handler(args)
    fmt = args.format or ("json" if extra else "csv")
    if fmt not in ("csv", "json"):
        raise ConfigError(f"format must be csv or json, not {fmt!r}")
    text = report.to_json(rows, args.seed, extra) if fmt == "json" else report.to_csv(rows)
    if args.out:
        Path(args.out).write_text(text)
    return (0 if report.all_pass(rows) else 1), text, args.out


def main(argv=None) -> int:
    try:
        status, text, out = run(argv)
    except KacLabError as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return 2
    if out is None:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
