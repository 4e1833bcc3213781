# The command line: train from a JSON config, then re-evaluate a checkpoint
#
# Equivalent shell session:
#   ssbe train --config cfg.json --out runs/demo
#   ssbe eval --checkpoint runs/demo/checkpoint_ssbe.bin
#   ssbe verify-autodiff --seed 0

import json
import tempfile
from pathlib import Path

from ssbe.cli import main

work = Path(tempfile.mkdtemp())
cfg = {"name": "cli_demo", "problem": "heat_square", "layer_sizes": [3, 10, 10, 1],
       "n_interior": 200, "n_boundary_per_chart": 20, "n_initial": 100,
       "total_steps": 300, "eval_resolution": 10}
(work / "cfg.json").write_text(json.dumps(cfg))

main(["train", "--config", str(work / "cfg.json"), "--out", str(work / "run")])
print(sorted(p.name for p in (work / "run").iterdir()))
print((work / "run" / "curve_ssbe.csv").read_text().splitlines()[:3])

main(["eval", "--checkpoint", str(work / "run" / "checkpoint_ssbe.bin"), "--grid", "12"])
main(["verify-autodiff", "--seed", "0", "--nets", "3"])
main(["counterexample", "--imax", "5"])
