#!/usr/bin/env python3
"""Run the taxonomy service.

    python3 scripts/serve.py --data ./data --port 8000

On first start, pass --bootstrap USER:PASSWORD to register an initial
account. The web UI (if built into frontend/dist) is served at /ui.
"""

from __future__ import annotations

import argparse
import sys
import threading
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

import uvicorn

from taxonomist.api import create_app
from taxonomist.errors import DuplicateUser
from taxonomist.project import Server


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--data", type=Path, default=Path("./data"),
                        help="state directory (default ./data)")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8000)
    parser.add_argument("--bootstrap", metavar="USER:PASSWORD",
                        help="register an account before serving")
    parser.add_argument("--static", type=Path,
                        default=Path(__file__).resolve().parent.parent
                        / "frontend" / "dist",
                        help="directory with the built web UI")
    args = parser.parse_args()

    server = Server(args.data)
    if args.bootstrap:
        username, _, password = args.bootstrap.partition(":")
        try:
            server.users.register(username, password)
            print(f"registered user {username!r}")
        except DuplicateUser:
            print(f"user {username!r} already exists")

    static = args.static if args.static.exists() else None
    app = create_app(server, static_dir=static)

    def sweep_outboxes() -> None:
        import time
        while True:
            time.sleep(1.0)
            try:
                server.deliver_all_notifications()
            except Exception as err:  # noqa: BLE001
                print(f"notification delivery error: {err}", file=sys.stderr)

    threading.Thread(target=sweep_outboxes, daemon=True).start()
    uvicorn.run(app, host=args.host, port=args.port)


if __name__ == "__main__":
    main()
