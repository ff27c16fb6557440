# Script to tabulate the minimum sin-loss risk on {0, ..., n} and its n^2 scaling, together with the prolate
# eigenvalue curve of the interval loss.
# Tuneable parameters are at the top of the script.
# Tables are saved to data/heisenberg_sweep.csv and data/prolate_sweep.csv

import os
import numpy as np

from covphase.finite_opt import heisenberg_table
from covphase.prolate import prolate_curve

PARENT_DIR = os.path.dirname(os.getcwd())
DATA_DIR = os.path.join(PARENT_DIR, "data")
if not os.path.exists(DATA_DIR):
    os.mkdir(DATA_DIR)

N_VALUES = [1, 2, 5, 10, 20, 50, 100, 200, 500, 1000, 2000, 5000]  # Largest index of each set {0, ..., n}.
T_VALUES = np.arange(2.0, 12.5, 0.5)  # Interval half-widths for the prolate curve.
QUAD_ORDER = 120  # Gauss-Legendre nodes of the Nystrom discretisation.
N_JOBS = -1  # joblib workers, -1 uses every core.

heisenberg = heisenberg_table(N_VALUES, n_jobs=N_JOBS)
heisenberg["limit"] = np.pi**2 / 2
heisenberg.to_csv(os.path.join(DATA_DIR, "heisenberg_sweep.csv"), index=False, float_format="%.12g", lineterminator="\n")

prolate = prolate_curve(T_VALUES, QUAD_ORDER, n_jobs=N_JOBS)
prolate.to_csv(os.path.join(DATA_DIR, "prolate_sweep.csv"), index=False, float_format="%.12g", lineterminator="\n")
print(heisenberg.to_string(index=False))
