"""Assemblages grown from finite unitary groups, and where they beat two-outcome steering.

Run with ``python3 demos/03_from_groups.py`` (about two minutes).
"""

from symmetra import construct_assemblages, flag_beats_dichotomic, load_group, robustness
from symmetra.steering import dichotomic_werner_bound

# The construction looks for subgroups whose fixed-point structure singles
# out one projector, collects its orbit and groups the orbit into
# measurements compatibly with the group action.
for key in ("binary_octahedral", "binary_icosahedral", "st25"):
    g = load_group(key)
    res = construct_assemblages(g)
    print(f"{key} (order {g.order}):")
    for c in res.assemblages:
        rep = robustness(c.assemblage, c.symmetry, reduce_with=True)
        print(f"  d={c.assemblage.dim} |M|={c.n_measurements:2d} rank={c.generator.rank} "
              f"alpha*={rep.alpha_star:.6f} beta*={rep.beta_star:.6f}")

# A Werner state with visibility below beta* is steerable with the
# assemblage. If that threshold undercuts the best two-outcome bound, the
# assemblage shows that many-outcome measurements steer states that no
# two-outcome family can.
g = load_group("st27")
print(f"\nst27 (order {g.order}), two-outcome Werner bound {dichotomic_werner_bound(3):.4f}:")
# Two conjugate orbits give two such assemblages with equal values.
picks = [c for c in construct_assemblages(g).assemblages
         if c.n_measurements == 15 and c.generator.rank == 1]
for k, c in enumerate(picks):
    rep = robustness(c.assemblage, c.symmetry, reduce_with=True)
    st = flag_beats_dichotomic(rep, 3)
    print(f"  #{k} |M|={c.n_measurements} beta*={rep.beta_star:.6f} [{rep.beta_bound}] "
          f"beats two-outcome: {st.beats_dichotomic_wer} ({st.status})")
