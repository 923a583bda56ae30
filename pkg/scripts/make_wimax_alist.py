"""Regenerate the bundled (192, 96) alist from the rate-1/2 base matrix."""

from pathlib import Path

from lctsim.wimax import expand_alist

OUT = Path(__file__).resolve().parents[1] / "src" / "lctsim" / "data" / "wimax_192_96.alist"

if __name__ == "__main__":
    OUT.write_text(expand_alist(8))
    print(f"wrote {OUT}")
