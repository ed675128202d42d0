from __future__ import annotations
from reconnect2d.cli import main

if __name__ == "__main__":
    main()
