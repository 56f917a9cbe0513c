"""Scripted chat-completions endpoint for selector tests."""

import json
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer


def completion(content):
    return json.dumps({"choices": [{"message": {"role": "assistant", "content": content}}]})


MODES = {
    "valid": (200, completion('{"action":"switch","algorithm":"SA","reason":"stagnation"}')),
    "continue": (200, completion('{"action":"continue"}')),
    "prose": (200, completion('Sure! ```json {"action":"switch","algorithm":"ACO"} ``` good luck')),
    "server_error": (500, "internal error"),
    "garbage": (200, "<<not json at all>>"),
    "bad_content": (200, completion("I would keep going, honestly.")),
    "timeout": (200, completion('{"action":"continue"}')),
}


class MockEndpoint:
    def __init__(self, mode="valid", delay=1.0):
        self.mode = mode
        self.delay = delay
        self.requests = []
        outer = self

        class Handler(BaseHTTPRequestHandler):
            def do_POST(self):
                body = self.rfile.read(int(self.headers.get("Content-Length", 0)))
                outer.requests.append(json.loads(body))
                if outer.mode == "timeout":
                    time.sleep(outer.delay)
                status, text = MODES[outer.mode]
                data = text.encode()
                try:
                    self.send_response(status)
                    self.send_header("Content-Type", "application/json")
                    self.send_header("Content-Length", str(len(data)))
                    self.end_headers()
                    self.wfile.write(data)
                except (BrokenPipeError, ConnectionResetError):
                    pass

            def log_message(self, *args):
                pass

        self.server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self.server.daemon_threads = True
        self.thread = threading.Thread(target=self.server.serve_forever, daemon=True)

    @property
    def url(self):
        return f"http://127.0.0.1:{self.server.server_address[1]}/v1/chat/completions"

    def __enter__(self):
        self.thread.start()
        return self

    def __exit__(self, *exc):
        self.server.shutdown()
        self.server.server_close()
