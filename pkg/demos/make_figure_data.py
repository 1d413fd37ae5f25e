"""Regenerate every shipped figure dataset through the command-line runner.

Equivalent to:

    dualbath steady   --config demos/configs/fig2.json     --out out
    dualbath steady   --config demos/configs/fig2_k2.json  --out out
    dualbath dynamics --config demos/configs/fig3.json     --out out
    dualbath dynamics --config demos/configs/fig3_k2.json  --out out
    dualbath mqs      --config demos/configs/fig4.json     --out out

The CSVs feed the plotting frontend (frontend/, `dualbath-figs`).
"""

import sys
from pathlib import Path

from dualbath.cli import run

CONFIGS = [
    ("steady", "fig2.json"),
    ("steady", "fig2_k2.json"),
    ("dynamics", "fig3.json"),
    ("dynamics", "fig3_k2.json"),
    ("mqs", "fig4.json"),
]


def main(out_dir="out"):
    cfg_dir = Path(__file__).parent / "configs"
    for mode, name in CONFIGS:
        print(f"== {mode} {name}")
        for path in run(mode, cfg_dir / name, out_dir):
            print("  ", path)


if __name__ == "__main__":
    main(*sys.argv[1:])
