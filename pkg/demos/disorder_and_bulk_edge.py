"""Disordered SSH chains: localizer against the real-space winding and the
kappa-integrated Chern number of the flattened family.

Run with ``python3 demos/disorder_and_bulk_edge.py``.
"""

from speclocalizer.bec import halfline_flow_symmetry, kubo_chern, polar_ring_block
from speclocalizer.invariants import model_invariant
from speclocalizer.localizer import LocalizerSpec, localizer_inertia
from speclocalizer.operators import Model

ELL = 30

print("seed  half-signature  winding  kubo(+)  kubo(-)")
for seed in range(1, 9):
    model = Model("ssh", v=0.7, w=1.0, disorder=0.3, seed=seed)
    half = localizer_inertia(LocalizerSpec(model, ELL, 0.05)).signature / 2
    wind = model_invariant(model, ELL).value
    U = polar_ring_block(model, 2 * ELL)
    kp, km = kubo_chern(U, sign=1), kubo_chern(U, sign=-1)
    print(f"{seed:>4}  {half:>14.0f}  {wind:>7}  {kp.pre_rounding:>7.4f}  {km.pre_rounding:>7.4f}")

for v, w in [(0.4, 1.0), (1.0, 0.4)]:
    r = halfline_flow_symmetry(Model("ssh", v=v, w=w), 20)
    print(f"ssh({v}, {w}): full-line flow {r.full}, half-line flow {r.half}, "
          f"plain box flow {r.box_flow}")
