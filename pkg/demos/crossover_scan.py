"""EoF and optimised EPR variance against input squeezing.

Direct transmission against swapping with the first mode kept local
(split 0), for total lengths 0.5, 1 and 2 absorption lengths. Writes one
CSV per length into the working directory and prints the crossovers.
"""

from pathlib import Path

import numpy as np

from cvswap.experiment import ExperimentConfig, run_scan, write_scan

r = tuple(np.round(np.linspace(0.01, 3.0, 300), 10))

for loss in (0.5, 1.0, 2.0):
    cfg = ExperimentConfig(r_values=r, loss=loss, split=0.0)
    rows = run_scan(cfg)
    write_scan(rows, cfg, Path(f"crossover_l{loss}.csv"))
    direct = [x for x in rows if x["scheme"] == "direct"]
    swap = [x for x in rows if x["scheme"] == "swap"]
    eof_cross = next((d["r"] for d, s in zip(direct, swap) if s["eof"] > d["eof"]), None)
    epr_cross = next((d["r"] for d, s in zip(direct, swap) if s["epr_opt"] < d["epr_opt"]), None)
    print(
        "l/l_a=%.1f  max EoF direct %.3f swap %.3f  EoF crossover r=%s  EPR crossover r=%s"
        % (loss, max(d["eof"] for d in direct), max(s["eof"] for s in swap), eof_cross, epr_cross)
    )
