"""Run the command-line front end the way a sweep script would.

Everything the CLI emits is plain CSV and JSON so batch experiments can
be diffed, archived, and plotted with anything.  Identical inputs give
byte-identical reports; this drives a few subcommands into a scratch
directory and shows what lands there.
"""
import io
import json
import tempfile
from contextlib import redirect_stderr, redirect_stdout
from pathlib import Path

from beamctl.cli import main

scratch = Path(tempfile.mkdtemp(prefix="beamctl-demo-"))


def run(label, *argv):
    out = scratch / label
    print(f"\n$ beamctl {' '.join(argv)}")
    captured = io.StringIO()
    with redirect_stdout(captured), redirect_stderr(captured):
        code = main(list(argv) + ["--out", str(out)])
    for line in captured.getvalue().splitlines():
        print(f"  | {line}")
    files = sorted(p.name for p in out.iterdir()) if out.exists() else []
    print(f"  exit {code}, files: {', '.join(files)}")
    return out


out = run("spectrum", "spectrum", "--rho", "2.5", "--modes", "6")
doc = json.loads((out / "spectrum.json").read_text())
print(f"  collisions reported: {doc['collisions']}")

out = run("synth", "synthesize", "--modes", "3", "--precision-bits", "192",
          "--data", "1:1:0,3:0.3:0.1")
doc = json.loads((out / "synthesis.json").read_text())
print(f"  cost {float(doc['cost']):.4f} at {doc['precision_bits_used']} bits")

# a second identical run must reproduce the report byte for byte
out2 = run("synth-again", "synthesize", "--modes", "3",
           "--precision-bits", "192", "--data", "1:1:0,3:0.3:0.1")
same = (out / "synthesis.json").read_bytes() == (out2 / "synthesis.json").read_bytes()
print(f"  byte-identical with the first run: {same}")

out = run("verify", "verify", "--modes", "2", "--precision-bits", "160",
          "--data", "1:1:0,2:0:0.2", "--tolerance", "1e-6")
doc = json.loads((out / "verification.json").read_text())
print(f"  verdict: {doc['verdict']}")

out = run("refused", "synthesize", "--boundary", "neumann", "--modes", "3",
          "--precision-bits", "160", "--data", "2:1:0")
doc = json.loads((out / "synthesis.json").read_text())
print(f"  cause recorded in JSON: {doc['error']['type']} "
      f"on mode {doc['error']['mode']}")

run("sweep", "cost-sweep", "--modes", "2", "--precision-bits", "192",
    "--horizons", "0.5,1,2")

print(f"\nall outputs under {scratch}")
