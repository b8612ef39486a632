"""Gronwall certificate for a weak run against a manufactured reference."""
import numpy as np

from qfluid import FluidState, Params, SolverConfig, TorusGrid, run
from qfluid import certify as cf
from qfluid.state import augment

g = TorusGrid(1, 64)
p = Params(mu=0.5)
R0 = 1 + 0.2 * np.cos(g.x[0])
spec = cf.TravelingWave(amp=0.1)
ref = cf.manufactured_reference(spec, R0, p, 1e-3, 0.5, grid=g)
weak = run(augment(FluidState(g, R0, spec.U(g, 0.0)), p), p,
           SolverConfig(dt=1e-3, t_end=0.5, report_every=100), refs=ref)

C = cf.estimate_C(ref, p)
print("C =", round(C, 3), "->", cf.gronwall_certificate(weak, ref, p, C).to_dict()["verdict"])
# dropping the forcing and the growth constant should break the bound
adv = cf.gronwall_certificate(weak, ref, p, 0.0, include_b=False)
print("adversarial ->", adv.to_dict()["verdict"])
