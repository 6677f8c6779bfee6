"""
Command line
============

The ``permflow`` command exposes the same operations. Here it is driven
in-process through ``main``; from a shell, drop the list and quote.
"""

# %%
import tempfile
from pathlib import Path

from permflow.cli import main

tmp = Path(tempfile.mkdtemp())
(tmp / "a.csv").write_text("1,2\n3,4\n")
(tmp / "v.csv").write_text("1,4\n")

main(["perm", str(tmp / "a.csv"), "--algo", "ryser"])  # 10
main(["symmean", str(tmp / "v.csv"), "--all"])  # 2.5, 2

# %%
spec = '{"kind": "IID", "m": 3, "params": {"low": 0, "high": 2}, "seed": 42}'
main(["converge", "--spec", spec, "--n-max", "10000", "--factor", "4"])

# %% [markdown]
# Benchmarks report every algorithm per size. Cells that would exceed a cap
# are marked "skipped" rather than run.

# %%
main(["bench", "--m", "3,6", "--n", "10,1000", "--reps", "3", "--seed", "1"])
