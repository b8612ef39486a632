"""Uniform flow under linear drag: |u| should decay like exp(-mu t)."""
import math

import numpy as np

from qfluid import Params, SolverConfig, TorusGrid, run
from qfluid.recipes import make_initial

g = TorusGrid(1, 32)
p = Params(mu=1.0)
st = make_initial("uniform_flow", g, p, velocity=[0.1])
tr = run(st, p, SolverConfig(dt=1e-3, t_end=1.0, report_every=250))
for s in tr.states:
    u = float(np.max(np.abs(s.u)))
    print(f"t={s.time:.2f}  |u|={u:.8f}  exact={0.1 * math.exp(-s.time):.8f}")
