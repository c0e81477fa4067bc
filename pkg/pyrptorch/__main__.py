from __future__ import annotations

from pyrptorch.cli import main

raise SystemExit(main())
