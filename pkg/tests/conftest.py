import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest


class MockServer:
    """Local HTTP endpoint that records request arrival times.

    ``statuses`` is consumed one per request; once exhausted every
    response is 200 with ``body``.
    """

    def __init__(self, body: bytes = b"", statuses=()):
        self.body = body
        self.statuses = list(statuses)
        self.arrivals: list[float] = []
        self.lock = threading.Lock()
        mock = self

        class Handler(BaseHTTPRequestHandler):
            def do_GET(self):
                with mock.lock:
                    mock.arrivals.append(time.monotonic())
                    status = mock.statuses.pop(0) if mock.statuses else 200
                payload = mock.body if status == 200 else b"error"
                self.send_response(status)
                self.send_header("Content-Length", str(len(payload)))
                self.end_headers()
                self.wfile.write(payload)

            def log_message(self, *args):
                pass

        self.httpd = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self.url = f"http://127.0.0.1:{self.httpd.server_address[1]}/search"
        self.thread = threading.Thread(target=self.httpd.serve_forever, daemon=True)

    def __enter__(self):
        self.thread.start()
        return self

    def __exit__(self, *exc):
        self.httpd.shutdown()
        self.httpd.server_close()


@pytest.fixture
def mock_server():
    servers = []

    def start(body=b"", statuses=()):
        s = MockServer(body, statuses).__enter__()
        servers.append(s)
        return s

    yield start
    for s in servers:
        s.__exit__(None, None, None)


class FakeClock:
    def __init__(self, start=1000.0):
        self.now = start
        self.sleeps: list[float] = []

    def __call__(self):
        return self.now

    def sleep(self, seconds):
        self.sleeps.append(seconds)
        self.now += seconds


@pytest.fixture
def fake_clock():
    return FakeClock()


# ---- acceptance criteria report ------------------------------------------------

_criteria: dict[int, tuple[str, str]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    failed = report.failed or (report.when == "call" and not report.passed)
    if failed or (report.when == "call" and number not in _criteria):
        _criteria[number] = ("FAIL" if failed else "PASS", title)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        verdict, title = _criteria[number]
        terminalreporter.write_line(f"{verdict} criterion {number:2d}: {title}")
