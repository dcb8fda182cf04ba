"""Feedback gain in the exp(5/2/2), Pj = 1 regime across Pt.

Prints the no-feedback lower and upper bounds, the best renewal rate of
each feedback scheme and the 1-bit upper bound, plus the ratio of the 1-bit
lower bound to the no-feedback lower bound.
"""

import argparse

from secrecy_lab.channel import ChannelModel, PowerConfig
from secrecy_lab.feedback import SCHEMES, maximize_rate, upper_bound_1bit
from secrecy_lab.nofeedback import lower_bound, upper_bound
from secrecy_lab.rng import RngStream


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--pt", type=float, nargs="+", default=[1.0, 3.0, 10.0, 30.0])
    ap.add_argument("--samples", type=int, default=1_000_000)
    ap.add_argument("--renewals", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    model = ChannelModel.exponential(5.0, 2.0, 2.0)
    rng = RngStream(args.seed)
    print("pt, C-, C+, " + ", ".join(SCHEMES) + ", upper_1bit, ratio")
    for pt in args.pt:
        p = PowerConfig(pt, 1.0)
        lo = lower_bound(model, p, args.samples, rng)
        up = upper_bound(model, p, args.samples, rng)
        rates = [maximize_rate(model, p, s, n_renewals=args.renewals, rng=rng)[1].value for s in SCHEMES]
        up1 = upper_bound_1bit(model, p, args.samples, rng)
        one_bit = max(lo.value, rates[0])
        ratio = one_bit / lo.value if lo.value > 0 else float("inf")
        print(f"{pt:g}, {lo.value:.4f}, {up.value:.4f}, " + ", ".join(f"{v:.4f}" for v in rates)
              + f", {up1.value:.4f}, {ratio:.2f}")


if __name__ == "__main__":
    main()
