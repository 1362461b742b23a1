"""Growth basis alpha of the U(1) constrained Hilbert space versus rishon number."""
import argparse

from qlink.automata import alpha_saturation_scan


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--nbar-max", type=int, default=10)
    p.add_argument("--window", type=int, nargs=2, default=(100, 1000))
    args = p.parse_args()
    scan = alpha_saturation_scan(range(1, args.nbar_max + 1), tuple(args.window))
    print("nbar,alpha,2-alpha")
    for nbar, alpha, gap in scan.rows:
        print(f"{nbar},{alpha:.10f},{gap:.10f}")
    slope, icpt, r2 = scan.loglog_fit(nbar_min=1)
    print(f"# ln(2-alpha) = {slope:.4f} ln(nbar) + {icpt:.4f}, R2 = {r2:.4f}")


if __name__ == "__main__":
    main()
