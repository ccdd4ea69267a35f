"""
The command-line pipeline
=========================

theory -> simulate -> compare on a small grid, in a temporary directory.
At n = 100 the regime-1 transform is still about 0.14 from its limit,
so compare reports FAIL for it while the trend check passes.
The same steps from a shell are ``gwsmall theory --config exp.ini --out run`` and so on.
"""
import pathlib
import tempfile

from gwsmall.cli import main

CONFIG = """
[experiment]
law = stable(alpha=0.5)
n_grid = 50, 100
lambda_grid = 1
min_hits = 3000
seed = 11

[regime.1]
id = 1
"""

with tempfile.TemporaryDirectory() as d:
    d = pathlib.Path(d)
    (d / "exp.ini").write_text(CONFIG)
    main(["theory", "--config", str(d / "exp.ini"), "--out", str(d)])
    main(["simulate", "--config", str(d / "exp.ini"), "--out", str(d)])
    code = main(["compare", "--theory", str(d / "theory_*.csv"),
                 "--estimates", str(d / "estimates_n*.json"), "--out", str(d)])
    print("compare exit code:", code)
    print(sorted(p.name for p in d.iterdir()))
