"""Emit the distillability ceiling q + g(q) and the NL-vs-F upper curve as CSV."""
import argparse
from pathlib import Path

from nlbox import bounds
from nlbox import io as nio


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--points", type=int, default=201)
    ap.add_argument("--out-dir", type=Path, default=Path("results"))
    args = ap.parse_args()
    args.out_dir.mkdir(parents=True, exist_ok=True)
    for name, curve in (("ceiling", bounds.ceiling_curve(args.points)),
                        ("nl_vs_fef", bounds.nl_vs_fef_curve(args.points))):
        (args.out_dir / f"{name}.csv").write_text(nio.curve_csv(curve))
    q, g = bounds.max_gap()
    print(f"largest gap g = {g:.6f} at q = {q:.6f}")


if __name__ == "__main__":
    main()
