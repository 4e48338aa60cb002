"""Regenerate the synthetic data files shipped with the scenarios.

    python3 scripts/make_demo_data.py

Writes the work-function demo grids and a surrogate Au surface PDOS table
into src/adatom_noise/scenarios/.  Output is deterministic.
"""

from pathlib import Path

import numpy as np
from scipy.integrate import trapezoid

from adatom_noise import units
from adatom_noise.electrostatics import synthetic_slab, write_grid

OUT = Path(__file__).resolve().parents[1] / "src" / "adatom_noise" / "scenarios"

A = units.to_au(1.0, "angstrom")
EV = units.to_au(1.0, "eV")


def slab_grids():
    # Au(111)-like slab: bulk below 10 A, vacuum plateau from ~15 A up to c = 40 A
    geom = dict(nx=4, ny=4, nz=200, a=4.99 * A, b=4.99 * A, c=40.0 * A,
                V_bulk=-8.0 * EV, V_vac=3.21 * EV, z_surface=10.0 * A, width=0.8 * A,
                corrugation=0.5 * EV)
    clean = synthetic_slab(**geom)
    write_grid(OUT / "workfunction_demo_clean.txt", clean,
               "synthetic clean slab, plane-averaged vacuum level 3.21 V")
    mu = units.to_au(1.60, "debye")
    area = 41.0 * A**2
    nlayer = synthetic_slab(**geom, dipole_sheet=(mu, area, 11.5 * A, 0.5 * A))
    write_grid(OUT / "workfunction_demo_n.txt", nlayer,
               "synthetic N-covered slab, 1.60 D per 41 A^2 dipole layer")


def pdos_table():
    # Surrogate shape: Debye-like f^2 rise, bulk T/L features and surface
    # modes near 2.31, 3.5, 4.0 and 4.3 THz, cut off above 5 THz.
    f = np.linspace(0.0, 5.5, 111)
    g = 0.08 * f**2 * (f < 4.8)
    for centre, height in ((2.31, 0.35), (2.75, 0.5), (3.5, 0.3), (4.0, 0.3), (4.3, 0.3), (4.61, 0.6)):
        g += height * np.exp(-0.5 * ((f - centre) / 0.12) ** 2)
    g *= np.clip((5.2 - f) / 0.4, 0.0, 1.0)
    g *= 3.0 / trapezoid(g, f)
    rows = ["# surrogate Au(111) surface-atom phonon density of states; not measured data",
            "# unit: 1/THz per atom, integrates to 3",
            "freq_thz,g_per_thz_per_atom"]
    rows += [f"{x:.4f},{y:.8e}" for x, y in zip(f, g)]
    (OUT / "au_pdos_surrogate.csv").write_text("\n".join(rows) + "\n", encoding="utf-8")


if __name__ == "__main__":
    OUT.mkdir(parents=True, exist_ok=True)
    slab_grids()
    pdos_table()
