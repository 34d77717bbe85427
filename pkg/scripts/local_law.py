"""Local-law probe: allowed beta (decay) against a violating beta (no decay).

    python3 scripts/local_law.py --n 1000,2000,4000,8000 --trials 20
"""
import argparse

from specpert.experiments import local_law_probe


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--model", default="triangular:m=1")
    ap.add_argument("--n", default="1000,2000,4000,8000")
    ap.add_argument("--alpha", type=float, default=0.5)
    ap.add_argument("--beta", default="0,0.15,0.45")
    ap.add_argument("--trials", type=int, default=20)
    ap.add_argument("--out", default=None)
    args = ap.parse_args()
    rep = local_law_probe(args.model, [int(v) for v in args.n.split(",")], args.alpha,
                          [float(v) for v in args.beta.split(",")], trials=args.trials)
    for bt, s in rep.params["summary"].items():
        print(f"beta={bt}: allowed={s['allowed']} slope={s['slope']:.3f} decays={s['decays']}")
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(rep.to_json(indent=1) + "\n")


if __name__ == "__main__":
    main()
