"""Qubit measurements from polyhedra: how much white noise until they become compatible?

Run with ``python3 demos/01_qubit_polyhedra.py``.
"""

import numpy as np

from symmetra import compatibility_oracle, dual_certificate, platonic_symmetry, robustness
from symmetra.construct import SOLIDS

# Each antipodal vertex pair of a solid gives a two-outcome projective
# measurement (1 +- n.sigma)/2. The rotation group of the solid permutes the
# outcomes transitively, and each vertex stabiliser fixes only its own axis,
# so the closed forms apply.
print(f"{'solid':18s} {'|M|':>4s} {'sections':>9s} {'alpha*':>12s} {'beta*':>12s}")
for solid in SOLIDS:
    a, sym = platonic_symmetry(solid)
    rep = robustness(a, sym)
    print(f"{solid:18s} {a.n_measurements:4d} {a.bundle.section_count():9d} "
          f"{rep.alpha_star:12.9f} {rep.beta_star:12.9f}")

# For qubits the two noise models agree, because the complement of a
# rank-one projector is again a rank-one projector.

# The octahedron is the Pauli triple. Below alpha* a joint measurement
# exists, and the oracle finds one by alternating projections.
a, sym = platonic_symmetry("octahedron")
rep = robustness(a, sym)
cert = dual_certificate(a, rep)
print(f"\noctahedron: alpha* = {rep.alpha_star:.6f}, certificate bound {cert.upper_bound:.6f}")
for eta in np.linspace(0.50, 0.62, 7):
    res = compatibility_oracle(a, float(eta), sym=sym)
    print(f"  eta = {eta:.2f}: {res.verdict:12s} iterations {res.iterations}")

# The witness at eta = 0.55 is an 8-outcome POVM, one effect per section.
res = compatibility_oracle(a, 0.55)
f = res.witness
print(f"\nwitness at 0.55: {len(f)} effects, smallest eigenvalue {np.linalg.eigvalsh(f).min():.2e}, "
      f"sum to identity within {np.abs(f.sum(axis=0) - np.eye(2)).max():.1e}")
