"""The seeded experiment harness and its command-line interface.

The same four experiment commands are available programmatically and via
the ``torus-phi4`` console script; this demo runs a shrunken invariance
experiment and a verification suite, writing JSON reports and CSV tables
to a scratch directory.
"""

import json
import tempfile
from pathlib import Path

from torus_phi4.cli import main
from torus_phi4.experiments import cmd_verify

out = Path(tempfile.mkdtemp(prefix="torus_phi4_demo_"))

# programmatic use: run one verification suite
rep = cmd_verify({"suite": "picard"}, seed=0, out_dir=out / "verify")
print(f"picard suite: passed={rep['passed']} "
      f"(details in {out/'verify'/'verify.json'})")

# command-line use: a shrunken invariance run (the full-size defaults are
# what the acceptance gate exercises; this one just shows the plumbing)
cfg = out / "invariance.cfg"
cfg.write_text("ensemble = 16\nn_steps = 100\nchain_steps = 1000\n"
               "n_cut = 2\nhorizon = 0.25\n")
code = main(["invariance", "--config", str(cfg), "--seed", "0",
             "--out", str(out / "inv")])
report = json.loads((out / "inv" / "invariance.json").read_text())
print(f"cli exit code {code}, worst |z| = {report['worst_abs_z']:.2f} "
      f"(tiny ensemble, so this is plumbing, not statistics)")
print(f"z-score table: {out/'inv'/'invariance_zscores.csv'}")
