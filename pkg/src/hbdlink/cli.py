"""Command-line front end: ``hbdlink analyze <scenario> --sweep axis=a:b:step ...``.

Exit status is 0 when every cell converged, 2 when some cell did not, and
1 for configuration or usage errors.
"""

import argparse
import sys
from importlib import resources
from pathlib import Path

from .scenario import ConfigParseError, load_scenarios
from .sweep import Axis, Metric, SweepError, SweepMode, SweepSpec, emit_csv, run_sweep

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NONCONVERGED = 2


def preset_names():
    root = resources.files("hbdlink") / "presets"
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".ini"))


def resolve_scenario(name):
    """A scenario path, or the name of a bundled preset such as ``gs-si``."""
    path = Path(name)
    if path.exists():
        return path
    candidate = resources.files("hbdlink") / "presets" / (name + ".ini")
    if candidate.is_file():
        return Path(str(candidate))
    raise ConfigParseError("no scenario file or preset named %r (presets: %s)"
                           % (name, ", ".join(preset_names())))


def parse_sweep(text):
    """``omega_db=0:30:1`` -> (Axis.OMEGA_DB, 0.0, 30.0, 1.0)."""
    try:
        axis, rng = text.split("=", 1)
        start, stop, step = (float(v) for v in rng.split(":"))
        return Axis(axis.strip().lower()), start, stop, step
    except ValueError:
        raise SweepError("bad --sweep %r; expected <axis>=<start>:<stop>:<step> with axis in %s"
                         % (text, ", ".join(a.value for a in Axis))) from None


def _csv_list(text, enum_cls, what):
    items = [t.strip().lower() for t in text.split(",") if t.strip()]
    try:
        return tuple(enum_cls(t) for t in items)
    except ValueError:
        raise SweepError("unknown %s in %r; choose from %s"
                         % (what, text, ", ".join(e.value for e in enum_cls))) from None


def build_parser():
    parser = argparse.ArgumentParser(prog="hbdlink", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    an = sub.add_parser("analyze", help="run a sweep and write CSV")
    an.add_argument("scenario", help="scenario file or preset name (%s)" % ", ".join(preset_names()))
    an.add_argument("--sweep", required=True, help="<axis>=<start>:<stop>:<step>")
    an.add_argument("--metrics", default="outage", help="comma list of %s"
                    % ", ".join(m.value for m in Metric))
    an.add_argument("--modes", default="", help="comma list of %s"
                    % ", ".join(m.value for m in SweepMode))
    an.add_argument("--samples", type=float, default=1e6, help="Monte-Carlo samples per point")
    an.add_argument("--seed", type=int, default=0)
    an.add_argument("--rf", type=float, default=0.5, help="multiplexing gain for df_variable")
    an.add_argument("--max-terms", type=int, default=200)
    an.add_argument("--variant", default=None, help="only this variant of a multi-variant file")
    an.add_argument("--out", required=True,
                    help="CSV path; multi-variant files write <stem>-<variant>.csv")
    sub.add_parser("presets", help="list bundled scenario presets")
    return parser


def _outputs(out, names):
    out = Path(out)
    if len(names) == 1:
        return {names[0]: out}
    suffix = out.suffix or ".csv"
    return {n: out.with_name("%s-%s%s" % (out.stem, n, suffix)) for n in names}


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.command == "presets":
        print("\n".join(preset_names()))
        return EXIT_OK
    try:
        path = resolve_scenario(args.scenario)
        variants = load_scenarios(path)
        if args.variant is not None:
            if args.variant not in variants:
                raise ConfigParseError("no variant %r; have %s" % (args.variant, sorted(variants)))
            variants = {args.variant: variants[args.variant]}
        axis, start, stop, step = parse_sweep(args.sweep)
        if args.samples != int(args.samples):
            raise SweepError("--samples must be an integer")
        spec = SweepSpec(
            axis=axis, start=start, stop=stop, step=step,
            metrics=_csv_list(args.metrics, Metric, "metric"),
            modes=_csv_list(args.modes, SweepMode, "mode"),
            output_path=args.out, samples=int(args.samples), seed=args.seed,
            rf=args.rf, max_terms=args.max_terms,
        )
    except (ConfigParseError, SweepError, ValueError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_CONFIG
    status = EXIT_OK
    for name, target in _outputs(args.out, list(variants)).items():
        table = run_sweep(variants[name], spec)
        try:
            emit_csv(table, target)
        except OSError as exc:
            print("error: cannot write %s: %s" % (target, exc), file=sys.stderr)
            return EXIT_CONFIG
        flags = [i for i, c in enumerate(table.columns) if c.endswith("_converged")]
        bad = sum(1 for row in table.rows for i in flags if row[i] is not True)
        print("%s: %d rows -> %s%s" % (name, len(table.rows), target,
                                       "" if not bad else " (%d non-converged cells)" % bad))
        if bad:
            status = EXIT_NONCONVERGED
    return status


if __name__ == "__main__":
    sys.exit(main())
