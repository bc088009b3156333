"""Command line interface: ``levysmooth verify | plot | sample | symbol``.

Exit codes: 0 success (all checks pass), 1 some check failed, 2 invalid
configuration or arguments, 3 numerical failure.  The worker count for path
sampling is read from ``LEVYSMOOTH_THREADS``.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .exceptions import (ConfigError, ConvergenceError, InadmissibleWeightError, LevySmoothError,
                         QuadratureError, SamplerError)
from .levy_model import levy_symbol, load_model
from .paths import RngSeed, endpoint_summary_csv, sample_endpoints
from .plotting import plot_csv
from .reports import summarize
from .verify import SUITES, load_config, run_suite

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def _parser():
    p = _Parser(prog="levysmooth", description="Smoothing estimates for Levy semigroups.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("--suite", required=True, choices=SUITES + ("all",))
    v.add_argument("--config", required=True, help="JSON configuration file")
    v.add_argument("--out", help="output directory (default: config output_dir or .)")

    pl = sub.add_parser("plot", help="render a report CSV as SVG")
    pl.add_argument("--in", dest="inp", required=True)
    pl.add_argument("--out", required=True)

    s = sub.add_parser("sample", help="sample endpoints L_t and summarize them")
    s.add_argument("--model", required=True, help="JSON model file")
    s.add_argument("--n", type=int, required=True, help="number of paths")
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--t", type=float, default=1.0)
    s.add_argument("--eps-cut", type=float)
    s.add_argument("--out", help="CSV file (default: stdout)")

    sy = sub.add_parser("symbol", help="evaluate the Levy symbol psi(xi)")
    sy.add_argument("--model", required=True, help="JSON model file")
    sy.add_argument("--xi", required=True, action="append",
                    help="comma-separated frequency vector; may be repeated")
    return p


def _cmd_verify(args):
    cfg = load_config(args.config)
    out = Path(args.out or cfg.output_dir or ".")
    out.mkdir(parents=True, exist_ok=True)
    results = run_suite(args.suite, cfg)
    reports = []
    for rep, artifacts in results:
        rep.save(out / f"{rep.name}.csv")
        for fname, text in sorted(artifacts.items()):
            (out / fname).write_text(text)
        reports.append(rep)
    text, ok = summarize(reports)
    (out / "summary.txt").write_text(text)
    sys.stdout.write(text)
    return EXIT_OK if ok else EXIT_FAIL


def _cmd_plot(args):
    plot_csv(args.inp, args.out)
    return EXIT_OK


def _cmd_sample(args):
    if args.n < 1:
        raise ConfigError("--n must be positive")
    model = load_model(args.model)
    ends = sample_endpoints(model, args.t, args.n, RngSeed(args.seed), args.eps_cut)
    if args.out:
        with open(args.out, "w") as fh:
            endpoint_summary_csv(ends, fh)
    else:
        endpoint_summary_csv(ends, sys.stdout)
    return EXIT_OK


def _cmd_symbol(args):
    model = load_model(args.model)
    vecs = []
    for item in args.xi:
        try:
            xi = np.array([float(v) for v in item.split(",")])
        except ValueError as exc:
            raise ConfigError(f"cannot parse --xi {item!r}") from exc
        if xi.size != model.dimension:
            raise ConfigError(f"--xi {item!r} has {xi.size} components, model dimension is "
                              f"{model.dimension}")
        vecs.append((item, xi))
    sys.stdout.write("xi,re_psi,im_psi\n")
    for item, xi in vecs:
        val = complex(np.asarray(levy_symbol(model, xi if model.dimension > 1 else xi[0])).ravel()[0])
        sys.stdout.write(f"{item},{val.real!r},{val.imag!r}\n")
    return EXIT_OK


_COMMANDS = {"verify": _cmd_verify, "plot": _cmd_plot, "sample": _cmd_sample, "symbol": _cmd_symbol}


def main(argv=None):
    """Entry point; returns the process exit code."""
    try:
        args = _parser().parse_args(argv)
        return _COMMANDS[args.command](args)
    except (ConfigError, InadmissibleWeightError) as exc:
        sys.stderr.write(f"levysmooth: configuration error: {exc}\n")
        return EXIT_CONFIG
    except QuadratureError as exc:
        sys.stderr.write(f"levysmooth: numerical error: {exc} (residual {exc.residual:.3e})\n")
        return EXIT_NUMERIC
    except ConvergenceError as exc:
        sys.stderr.write(f"levysmooth: numerical error: {exc}; diagnostics {exc.diagnostics}\n")
        return EXIT_NUMERIC
    except (SamplerError, LevySmoothError, ArithmeticError) as exc:
        sys.stderr.write(f"levysmooth: numerical error: {exc}\n")
        return EXIT_NUMERIC
    except OSError as exc:
        sys.stderr.write(f"levysmooth: {exc}\n")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
