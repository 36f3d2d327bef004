import sys
import threading
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent))

import pytest
import uvicorn

from modelweave.server.app import create_app


class LiveRegistry:
    """A registry served over a real socket on an ephemeral port."""

    def __init__(self, root: Path):
        self.root = Path(root)
        config = uvicorn.Config(
            create_app(str(root)), host="127.0.0.1", port=0, log_level="error"
        )
        self.server = uvicorn.Server(config)
        self.thread = threading.Thread(target=self.server.run, daemon=True)
        self.url = ""

    def start(self) -> "LiveRegistry":
        self.thread.start()
        deadline = time.monotonic() + 15
        while not self.server.started:
            if time.monotonic() > deadline:
                raise RuntimeError("registry server did not start")
            time.sleep(0.02)
        port = self.server.servers[0].sockets[0].getsockname()[1]
        self.url = f"http://127.0.0.1:{port}"
        return self

    def stop(self) -> None:
        self.server.should_exit = True
        self.thread.join(timeout=10)


@pytest.fixture()
def live_registry(tmp_path):
    registry = LiveRegistry(tmp_path / "store").start()
    yield registry
    registry.stop()
