# Script to tabulate the energy-constrained sin-loss risk kappa(E) and the uncertainty trade-off bound over a range of energies.
# Tuneable parameters are at the top of the script.
# The table is saved to data/tradeoff_sweep.csv with columns E, s_star, kappa, kappa_asymptote, bound, bound_asymptote.

import os
import numpy as np

from covphase.energy import kappa_curve
from covphase.uncertainty import tradeoff_asymptotic

PARENT_DIR = os.path.dirname(os.getcwd())
DATA_DIR = os.path.join(PARENT_DIR, "data")
if not os.path.exists(DATA_DIR):
    os.mkdir(DATA_DIR)

E_MIN = 0.1  # Smallest mean energy bound.
E_MAX = 300.0  # Largest mean energy bound; kappa becomes expensive well beyond a few hundred.
N_POINTS = 80  # Number of geometrically spaced energies.
N_JOBS = -1  # joblib workers, -1 uses every core.

OUTPUT_FILE = os.path.join(DATA_DIR, "tradeoff_sweep.csv")

energies = np.geomspace(E_MIN, E_MAX, N_POINTS)
table = kappa_curve(energies, n_jobs=N_JOBS)
table = table.rename(columns={"asymptote": "kappa_asymptote"})
table["bound"] = 1 - (1 - table["kappa"]) ** 2
table["bound_asymptote"] = [tradeoff_asymptotic(E) for E in energies]
table = table[["E", "s_star", "kappa", "kappa_asymptote", "bound", "bound_asymptote"]]

table.to_csv(OUTPUT_FILE, index=False, float_format="%.12g", lineterminator="\n")
print(f"Saved {len(table)} rows to {OUTPUT_FILE}")
