"""Regenerate the generator files in src/symmetra/data/groups/.

Each group is given by a few unitary generators; the expected order is
checked by closing them before the file is written.
"""

import json
from pathlib import Path

import numpy as np

from symmetra.groups import close_generators
from symmetra.io import matrix_to_json

OUT = Path(__file__).resolve().parents[1] / "src" / "symmetra" / "data" / "groups"

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]])
SZ = np.diag([1.0, -1.0]).astype(complex)
PHI = (1 + 5**0.5) / 2
OMEGA = np.exp(2j * np.pi / 3)


def rotation(axis, angle):
    n = np.asarray(axis, float)
    n = n / np.linalg.norm(n)
    return np.cos(angle / 2) * np.eye(2) - 1j * np.sin(angle / 2) * (n[0] * SX + n[1] * SY + n[2] * SZ)


def reflection(v, eigenvalue=-1.0):
    v = np.asarray(v, dtype=complex)
    v = v / np.linalg.norm(v)
    return np.eye(len(v)) + (eigenvalue - 1) * np.outer(v, v.conj())


def qubit_reflection(axis, eigenvalue):
    n = np.asarray(axis, float)
    n = n / np.linalg.norm(n)
    ns = n[0] * SX + n[1] * SY + n[2] * SZ
    return (np.eye(2) + ns) / 2 + eigenvalue * (np.eye(2) - ns) / 2


def groups():
    o90 = rotation([0, 0, 1], np.pi / 2)
    o120 = rotation([1, 1, 1], 2 * np.pi / 3)
    i72 = rotation([0, 1, PHI], 2 * np.pi / 5)
    i120 = rotation([1, 1, 1], 2 * np.pi / 3)
    st16 = qubit_reflection([0, 1, PHI], np.exp(2j * np.pi / 5))
    alpha = (-1 + 1j * np.sqrt(7)) / 2
    yield "binary_octahedral", "binary octahedral group 2O in SU(2)", 2, [o90, o120], 48
    yield "binary_icosahedral", "binary icosahedral group 2I in SU(2)", 2, [i72, i120], 120
    yield "quaternion", "quaternion unit group", 2, [1j * SX, 1j * SZ], 8
    yield "st8", "Shephard-Todd 8", 2, [np.diag([1, 1j]), o120 @ np.diag([1, 1j]) @ o120.conj().T], 96
    yield "st16", "Shephard-Todd 16", 2, [st16, i120 @ st16 @ i120.conj().T], 600
    yield "st24", "Shephard-Todd 24 (Klein)", 3, [reflection([1, 0, 0]), reflection([0, 1, 0]),
                                                 reflection([1, -alpha, 1]), reflection([1, 1, 0])], 336
    yield "st25", "Shephard-Todd 25 (Hessian)", 3, [reflection([0, 0, 1], OMEGA), reflection([1, 1, 1], OMEGA),
                                                   reflection([1, OMEGA, OMEGA], OMEGA)], 648
    yield "st27", "Shephard-Todd 27 (Valentiner)", 3, [reflection([1, 0, 0]), reflection([0, 1, 0]),
                                                      reflection([1, PHI, 1 / PHI]), reflection([0, 1, OMEGA])], 2160
    yield "st28", "Shephard-Todd 28 (Weyl F4)", 4, [reflection([0, 1, -1, 0]), reflection([0, 0, 1, -1]),
                                                   reflection([0, 0, 0, 1]), reflection([1, -1, -1, -1])], 1152


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for key, name, dim, gens, order in groups():
        g = close_generators(gens, max_order=order + 1)
        assert g.order == order, (key, g.order)
        doc = {"schema_version": 1, "kind": "group", "name": name, "dim": dim,
               "generators": [matrix_to_json(m) for m in gens], "expected_order": order}
        (OUT / f"{key}.json").write_text(json.dumps(doc, indent=1) + "\n")
        print(f"{key}: order {g.order}")


if __name__ == "__main__":
    main()
