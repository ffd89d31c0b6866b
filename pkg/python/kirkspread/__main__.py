"""Allow ``python -m kirkspread``."""

from __future__ import annotations

from kirkspread._cli import main

if __name__ == "__main__":
    main()
