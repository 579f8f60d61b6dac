"""triode-plots <run-dir> --figure <kind> --out <path>"""

from __future__ import annotations

import argparse
import sys

from .figures import FIGURE_KINDS, FigureSpec, MissingInputError, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="triode-plots",
        description="Render figures from a triode-lab run directory",
    )
    parser.add_argument("run_dir")
    parser.add_argument("--figure", required=True, choices=FIGURE_KINDS)
    parser.add_argument("--out", required=True)
    parser.add_argument("--epsilon", type=float, default=None)
    parser.add_argument("--dpi", type=int, default=150)
    args = parser.parse_args(argv)
    spec = FigureSpec(
        run_dir=args.run_dir,
        kind=args.figure,
        out_path=args.out,
        epsilon=args.epsilon,
        dpi=args.dpi,
    )
    try:
        path = render(spec)
    except MissingInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
