"""Order probe of the fourth-order term against the linear one across alpha.

    python3 scripts/subregime.py --n 500,1000,2000,4000 --alpha 0.25,0.3,0.35,0.4
"""
import argparse

from specpert.experiments import subregime_probe


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--model", default="triangular:m=1")
    ap.add_argument("--n", default="500,1000,2000")
    ap.add_argument("--alpha", default="0.25,0.3,0.35,0.4")
    ap.add_argument("--trials", type=int, default=50)
    ap.add_argument("--out", default=None)
    args = ap.parse_args()
    rep = subregime_probe(args.model, [int(v) for v in args.n.split(",")],
                          [float(v) for v in args.alpha.split(",")], trials=args.trials)
    for c in rep.cells:
        print(f"n={c['n']} alpha={c['alpha']}: |D4|/|A| = {c['ratio']:.3f}")
    for al, sl in rep.params["slopes"].items():
        print(f"alpha={al}: slope D4 vs eps {sl['D4_vs_eps']:.3f}, A vs eps {sl['A_vs_eps']:.3f}")
    for n, a in rep.params["crossover_alpha"].items():
        print(f"n={n}: crossover alpha {a:.3f}")
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(rep.to_json(indent=1) + "\n")


if __name__ == "__main__":
    main()
