"""Compare the inviscid hydrodynamic solver with the split-step wave oracle."""
from qfluid import Params, TorusGrid
from qfluid.certify import oracle_compare
from qfluid.recipes import make_initial

g = TorusGrid(1, 256)
p = Params(lam=1.0, mu=0.5, hbar=1.0)
st = make_initial("madelung_wave", g, p)
res = oracle_compare(st, p, dt=2.5e-4, t_end=0.5)
for k, v in res.items():
    print(f"{k:>14s}: {v:.3e}")
