"""Local chat-completions stub for backend conformance tests."""

import json
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer


class StubChatServer:
    """Serves ``POST /v1/chat/completions``.

    ``script`` is a list of HTTP statuses consumed one per request; when it
    runs out every request succeeds. Records request bodies, headers and the
    peak number of requests being handled at once.
    """

    def __init__(self, reply="<ACTION>No Action</ACTION>", script=(), delay=0.0, body=None):
        self.reply = reply
        self.script = list(script)
        self.delay = delay
        self.body = body
        self.requests = []
        self.in_flight = 0
        self.peak = 0
        self._lock = threading.Lock()
        outer = self

        class Handler(BaseHTTPRequestHandler):
            def log_message(self, *args):
                pass

            def do_POST(self):
                outer._handle(self)

        self.httpd = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self.httpd.daemon_threads = True
        self.thread = threading.Thread(target=self.httpd.serve_forever, daemon=True)

    @property
    def url(self):
        host, port = self.httpd.server_address
        return f"http://{host}:{port}"

    def __enter__(self):
        self.thread.start()
        return self

    def __exit__(self, *exc):
        self.httpd.shutdown()
        self.httpd.server_close()

    def _handle(self, h):
        length = int(h.headers.get("Content-Length", 0))
        payload = json.loads(h.rfile.read(length))
        with self._lock:
            self.in_flight += 1
            self.peak = max(self.peak, self.in_flight)
            self.requests.append({"path": h.path, "body": payload, "headers": dict(h.headers)})
            status = self.script.pop(0) if self.script else 200
        try:
            if self.delay:
                time.sleep(self.delay)
            if status == 200:
                body = self.body if self.body is not None else json.dumps(
                    {"choices": [{"message": {"role": "assistant", "content": self.reply}}]})
            else:
                body = json.dumps({"error": {"message": f"status {status}"}})
            data = body.encode()
            h.send_response(status)
            h.send_header("Content-Type", "application/json")
            h.send_header("Content-Length", str(len(data)))
            h.end_headers()
            h.wfile.write(data)
        finally:
            with self._lock:
                self.in_flight -= 1
