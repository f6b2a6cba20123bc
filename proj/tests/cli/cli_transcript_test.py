#!/usr/bin/env python3
# Copyright 2026 The pqe Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Drives the pqe binary as three processes and checks the chat transcript."""

import os
import queue
import signal
import socket
import subprocess
import sys
import tempfile
import threading
import time

TIMEOUT = 20.0


class Proc:
    def __init__(self, args, stdin=False):
        self.p = subprocess.Popen(
            args,
            stdin=subprocess.PIPE if stdin else subprocess.DEVNULL,
            stdout=subprocess.PIPE,
            stderr=subprocess.STDOUT,
            text=True,
            bufsize=1,
        )
        self.lines = []
        self.q = queue.Queue()
        threading.Thread(target=self._pump, daemon=True).start()

    def _pump(self):
        for line in self.p.stdout:
            line = line.rstrip("\n")
            self.lines.append(line)
            self.q.put(line)

    def wait_for(self, needle):
        deadline = time.time() + TIMEOUT
        if any(needle in l for l in self.lines):
            return True
        while time.time() < deadline:
            try:
                if needle in self.q.get(timeout=0.1):
                    return True
            except queue.Empty:
                pass
        raise AssertionError(f"timed out waiting for {needle!r}; output so far:\n" + "\n".join(self.lines))

    def send(self, text):
        self.p.stdin.write(text + "\n")
        self.p.stdin.flush()

    def stop(self):
        if self.p.poll() is None:
            self.p.send_signal(signal.SIGINT)
            try:
                self.p.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self.p.kill()
                self.p.wait()


def free_port():
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


def main():
    exe = sys.argv[1]
    port = free_port()
    relay_addr = f"127.0.0.1:{port}"
    procs = []
    with tempfile.TemporaryDirectory() as keys:
        try:
            relay = Proc([exe, "relay", "--listen", relay_addr])
            procs.append(relay)
            relay.wait_for(f"Server running on {relay_addr}")

            bob = Proc([exe, "client", "--name", "bob", "--peer", "alice", "--relay", relay_addr, "--keys", keys], stdin=True)
            procs.append(bob)
            bob.wait_for("Client bob ready")
            relay.wait_for("Registered bob")

            alice = Proc([exe, "client", "--name", "alice", "--peer", "bob", "--relay", relay_addr, "--keys", keys], stdin=True)
            procs.append(alice)
            alice.wait_for("Client alice ready. Type messages to send to bob.")
            relay.wait_for("Registered alice")

            alice.send("Hii bob")
            bob.wait_for("[alice] Hii bob")
            relay.wait_for("Relayed message from alice to bob")

            bob.send("Hello alice")
            alice.wait_for("[bob] Hello alice")

            assert os.path.exists(os.path.join(keys, "alice_pub.pem"))
            mode = os.stat(os.path.join(keys, "alice_priv.pem")).st_mode & 0o777
            assert mode == 0o600, oct(mode)
            assert not any("Hii bob" in l for l in relay.lines), "relay printed plaintext"
        finally:
            for p in reversed(procs):
                p.stop()
    print("cli transcript ok")


if __name__ == "__main__":
    main()
