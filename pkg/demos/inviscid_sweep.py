"""Shrink the viscosity and watch the distance to the inviscid oracle fall."""
from qfluid import Params, SolverConfig, TorusGrid
from qfluid.certify import inviscid_sweep
from qfluid.recipes import make_initial

g = TorusGrid(1, 64)
p = Params(mu=0.5)
st = make_initial("cosine", g, p)
rep = inviscid_sweep(st, p, [0.1, 0.05, 0.025], SolverConfig(dt=1e-3, t_end=0.5))
for row in rep.rows:
    print(f"nu={row.nu:<6g} relE_oracle={row.relE_oracle:.3e}  {row.verdict}")
print("monotone:", rep.monotone, " observed order:", rep.order)
