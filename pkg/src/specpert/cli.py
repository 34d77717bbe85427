"""Command line entry point: ``specpert <subcommand> ...``.

Exit codes: 0 success, 2 a numerical tolerance could not be met,
3 invalid configuration.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .ensemble import SampleConfig
from .errors import ConfigError, ModelError, ParameterRangeError, ToleranceError
from .experiments import (RegimeSpec, figure_dataset, local_law_probe, run_regime,
                          sample_spectra, subregime_probe)
from .models import closed_form_F, make_model, parse_example_id
from .testfunctions import cauchy_kernel
from .theory import B_from_model_F, FieldCovariance, F_numeric

EXIT_OK, EXIT_TOL, EXIT_CONFIG = 0, 2, 3


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _ints(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _emit(args, name: str, text: str) -> None:
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / name).write_text(text)
        print(out / name)
    else:
        sys.stdout.write(text)


def _csv(cols, rows) -> str:
    lines = [",".join(cols)]
    lines += [",".join(f"{v:.12g}" for v in r) for r in rows]
    return "\n".join(lines) + "\n"


def cmd_simulate(args) -> int:
    model = make_model(args.model)
    cfg = SampleConfig(n=args.n, c=args.c, alpha=args.alpha, law=args.law, seed=args.seed,
                       model=args.model)
    diff, _ = sample_spectra(model, cfg)
    if args.format == "json":
        _emit(args, "spectra.json", json.dumps({
            "config": json.loads(cfg.to_json()), "eps": diff.eps,
            "base": diff.base.values.tolist(), "perturbed": diff.pert.values.tolist()}))
    else:
        rows = np.column_stack([np.arange(1, diff.n + 1), diff.base.values, diff.pert.values])
        _emit(args, "spectra.csv", _csv(("i", "base", "perturbed"), rows))
    return EXIT_OK


def cmd_theory(args) -> int:
    model = make_model(args.model)
    ex = parse_example_id(args.model)
    a, b = model.support
    s = np.linspace(a, b, args.points)
    F = F_numeric(model, s)
    E = np.linspace(a - 1, b + 1, args.points)
    zs = E + 1j * args.im
    B = np.atleast_1d(B_from_model_F(model, zs))
    cov = FieldCovariance(model)
    var = np.array([cov.real_imag(cauchy_kernel(z))[:2] for z in zs])
    if args.format == "json":
        _emit(args, "theory.json", json.dumps({
            "model": args.model, "s": s.tolist(), "F": F.tolist(),
            "F_closed": closed_form_F(ex, s).tolist(), "E": E.tolist(), "im": args.im,
            "B_re": B.real.tolist(), "B_im": B.imag.tolist(),
            "var_re": var[:, 0].tolist(), "var_im": var[:, 1].tolist()}))
    else:
        _emit(args, "F.csv", _csv(("s", "F_numeric", "F_closed"),
                                   np.column_stack([s, F, closed_form_F(ex, s)])))
        _emit(args, "B.csv", _csv(("E", "B_re", "B_im", "var_re_Z", "var_im_Z"),
                                   np.column_stack([E, B.real, B.imag, var])))
    return EXIT_OK


def cmd_regime(args) -> int:
    if args.spec:
        spec = RegimeSpec.from_json(Path(args.spec).read_text())
    else:
        spec = RegimeSpec(regime=args.regime, model=args.model, n_list=tuple(_ints(args.n)),
                          c=args.c, alpha=args.alpha, trials=args.trials,
                          z_grid=tuple(complex(v.replace("i", "j")) for v in args.z.split(",")),
                          seed=args.seed)
    rep = run_regime(spec)
    _emit(args, "regime.json", rep.to_json(indent=1) + "\n")
    return EXIT_OK


PLOT_TEMPLATE = """import csv
import matplotlib.pyplot as plt

rows = list(csv.reader(open({path!r})))
head, data = rows[0], [[float(v) for v in r] for r in rows[1:]]
x = [r[0] for r in data]
plt.plot(x, [r[1] for r in data], label="empirical")
plt.plot(x, [r[2] for r in data], label="theory")
plt.xlabel(head[0])
plt.title({title!r})
plt.legend()
plt.savefig({png!r}, dpi=120)
"""


def cmd_figure(args) -> int:
    fig = figure_dataset(args.figure, n=args.n, alpha=args.alpha, seed=args.seed,
                         model=args.model)
    for name, (cols, rows) in fig.curves.items():
        fname = f"{args.figure}_{name}.csv"
        if args.format == "json":
            _emit(args, f"{args.figure}_{name}.json", json.dumps(
                {"figure": fig.figure, "model": fig.model, "n": fig.n, "alpha": fig.alpha,
                 "eps": fig.eps, "seed": fig.seed, "columns": list(cols),
                 "rows": np.asarray(rows).tolist()}))
        else:
            _emit(args, fname, _csv(cols, rows))
        if args.plot_script and args.out:
            title = f"{fig.figure} {name}: {fig.model}, n={fig.n}, alpha={fig.alpha}"
            script = PLOT_TEMPLATE.format(path=fname, title=title, png=fname[:-4] + ".png")
            _emit(args, f"plot_{args.figure}_{name}.py", script)
    return EXIT_OK


def cmd_locallaw(args) -> int:
    rep = local_law_probe(args.model, _ints(args.n), args.alpha, _floats(args.beta),
                          trials=args.trials, seed=args.seed)
    _emit(args, "locallaw.json", rep.to_json(indent=1) + "\n")
    return EXIT_OK


def cmd_subregime(args) -> int:
    rep = subregime_probe(args.model, _ints(args.n), _floats(args.alpha),
                          trials=args.trials, seed=args.seed)
    _emit(args, "subregime.json", rep.to_json(indent=1) + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="specpert", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="cmd", required=True)

    def common(sp, n="1000", alpha=0.5, model="triangular:m=1", fmt="csv"):
        sp.add_argument("--model", default=model)
        sp.add_argument("--n", default=n)
        sp.add_argument("--alpha", default=alpha)
        sp.add_argument("--c", type=float, default=1.0)
        sp.add_argument("--trials", type=int, default=50)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", default=None, help="output directory (default: stdout)")
        sp.add_argument("--format", choices=("csv", "json"), default=fmt)

    sp = sub.add_parser("simulate", help="one sample, dump both spectra")
    common(sp)
    sp.add_argument("--law", default="real-gaussian")
    sp.set_defaults(func=cmd_simulate, n_type=int, alpha_type=float)

    sp = sub.add_parser("theory", help="F, B(E + i*im) and Var Z curves")
    common(sp)
    sp.add_argument("--points", type=int, default=81)
    sp.add_argument("--im", type=float, default=1.0)
    sp.set_defaults(func=cmd_theory)

    sp = sub.add_parser("regime", help="Monte Carlo check of one regime")
    common(sp, fmt="json")
    sp.add_argument("--spec", help="RegimeSpec JSON file (overrides the flags)")
    sp.add_argument("--regime", default="semi")
    sp.add_argument("--z", default="1i")
    sp.set_defaults(func=cmd_regime, alpha_type=float)

    sp = sub.add_parser("figure", help="figure dataset for one sampled matrix")
    common(sp, n="10000", alpha=0.4, model=None)
    sp.add_argument("--figure", choices=("fig1", "fig2", "fig3", "fig4"), required=True)
    sp.add_argument("--plot-script", action="store_true",
                    help="also write a matplotlib script per curve (needs --out)")
    sp.set_defaults(func=cmd_figure, n_type=int, alpha_type=float)

    sp = sub.add_parser("locallaw", help="eps^-2 Delta G(z_n) - B(z_n) with Im z_n = n^-beta")
    common(sp, n="500,1000,2000", fmt="json")
    sp.add_argument("--beta", default="0,0.15,0.45")
    sp.set_defaults(func=cmd_locallaw, alpha_type=float)

    sp = sub.add_parser("subregime", help="|D4| against |A| across alpha")
    common(sp, n="500,1000,2000", alpha="0.25,0.3,0.35,0.4", fmt="json")
    sp.set_defaults(func=cmd_subregime)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "n_type", None) is int:
            args.n = int(args.n)
        if getattr(args, "alpha_type", None) is float:
            args.alpha = float(args.alpha)
        return args.func(args)
    except ToleranceError as exc:
        print(f"tolerance failure: {exc}", file=sys.stderr)
        return EXIT_TOL
    except (ConfigError, ParameterRangeError, ModelError, ValueError) as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
