"""JSON documents for matrices, groups and assemblages.

Every document carries ``schema_version``. Floats are written with Python's
shortest round-trip repr, so export followed by import is bit-exact.
Group generator files live in ``symmetra/data/groups``; set
``SYMMETRA_DATA_DIR`` to point at another directory with the same layout.
"""

from __future__ import annotations

import json
import os
from functools import lru_cache
from pathlib import Path

import numpy as np

from .bundle import Assemblage, OutcomeBundle, SymmetryData, check_normalization, symmetry_from_permutations
from .errors import InvariantViolation, SchemaMismatch
from .groups import FiniteMatrixGroup, close_generators

SCHEMA_VERSION = 1


def data_dir() -> Path:
    env = os.environ.get("SYMMETRA_DATA_DIR")
    return Path(env) if env else Path(__file__).resolve().parent / "data"


def matrix_to_json(m) -> dict:
    m = np.asarray(m, dtype=complex)
    return {"re": m.real.tolist(), "im": m.imag.tolist()}


def matrix_from_json(doc) -> np.ndarray:
    try:
        re = np.asarray(doc["re"], dtype=float)
        im = np.asarray(doc.get("im", np.zeros_like(re)), dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaMismatch(f"bad matrix entry: {exc}") from exc
    if re.shape != im.shape or re.ndim != 2:
        raise SchemaMismatch("matrix real and imaginary parts must be equal-shape 2-d arrays")
    return re + 1j * im


def _check_version(doc, kind: str) -> None:
    if not isinstance(doc, dict):
        raise SchemaMismatch("document must be a JSON object")
    if "schema_version" not in doc:
        raise SchemaMismatch("missing schema_version")
    if doc["schema_version"] != SCHEMA_VERSION:
        raise SchemaMismatch(f"schema_version {doc['schema_version']!r} is not {SCHEMA_VERSION}")
    if doc.get("kind") != kind:
        raise SchemaMismatch(f"expected a {kind!r} document, got {doc.get('kind')!r}")


# ------------------------------------------------------------------ groups

def group_to_json(group: FiniteMatrixGroup) -> dict:
    gens = group.generators if group.generators is not None else list(range(group.order))
    return {"schema_version": SCHEMA_VERSION, "kind": "group", "name": group.name, "dim": group.dim,
            "projective": bool(group.projective),
            "generators": [matrix_to_json(group.elements[g]) for g in gens],
            "expected_order": group.order}


def group_from_json(doc) -> FiniteMatrixGroup:
    _check_version(doc, "group")
    gens = [matrix_from_json(m) for m in doc["generators"]]
    expected = doc.get("expected_order")
    cap = expected + 1 if expected else 50000
    g = close_generators(gens, max_order=cap, projective=doc.get("projective", False), name=doc.get("name", ""))
    if expected is not None and g.order != expected:
        raise InvariantViolation(f"group closes to order {g.order}, file says {expected}")
    return g


def available_groups() -> list[str]:
    return sorted(p.stem for p in (data_dir() / "groups").glob("*.json"))


@lru_cache(maxsize=None)
def _load_group_cached(path: str) -> FiniteMatrixGroup:
    return group_from_json(json.loads(Path(path).read_text(encoding="utf-8")))


def load_group(name: str) -> FiniteMatrixGroup:
    """Load a shipped group by key (``"st25"``) or from an explicit JSON path."""
    p = Path(name)
    if not p.suffix:
        p = data_dir() / "groups" / f"{name.lower().replace(' ', '')}.json"
    if not p.exists():
        raise FileNotFoundError(f"no group file {p}; available: {', '.join(available_groups())}")
    return _load_group_cached(str(p.resolve()))


# ------------------------------------------------------------- assemblages

def export_assemblage(a: Assemblage, s: SymmetryData | None = None, extra: dict | None = None) -> dict:
    doc = {"schema_version": SCHEMA_VERSION, "kind": "assemblage", "name": a.name, "dim": a.dim,
           "fibres": [list(f) for f in a.bundle.fibres],
           "effects": [matrix_to_json(e) for e in a.effects]}
    if s is not None:
        doc["symmetry"] = {"group": group_to_json(s.group),
                           "outcome_permutations": s.outcome_action.images.tolist()}
    if extra:
        doc["extra"] = extra
    return doc


def import_assemblage(doc, tol: float = 1e-9) -> tuple[Assemblage, SymmetryData | None]:
    """Rebuild an assemblage, re-checking normalisation and positivity."""
    _check_version(doc, "assemblage")
    try:
        fibres = doc["fibres"]
        effects = np.array([matrix_from_json(e) for e in doc["effects"]])
    except (KeyError, TypeError) as exc:
        raise SchemaMismatch(f"missing field: {exc}") from exc
    n = len(effects)
    flat = [z for f in fibres for z in f]
    if sorted(flat) != list(range(n)):
        raise SchemaMismatch("fibres must partition the outcome indices")
    proj = [0] * n
    for x, f in enumerate(fibres):
        for z in f:
            proj[z] = x
    try:
        bundle = OutcomeBundle(tuple(proj))
        a = Assemblage(bundle, effects, doc.get("name", ""))
    except ValueError as exc:
        raise SchemaMismatch(str(exc)) from exc
    if np.max(np.abs(a.effects - np.conj(np.swapaxes(a.effects, 1, 2)))) > tol:
        raise InvariantViolation("an effect is not Hermitian")
    if a.min_effect_eigenvalue() < -tol:
        raise InvariantViolation("an effect is not positive semidefinite")
    ok, res = check_normalization(a, tol)
    if not ok:
        raise InvariantViolation(f"a measurement does not sum to identity (residual {res:.3e})")
    sym = None
    if "symmetry" in doc:
        group = group_from_json(doc["symmetry"]["group"])
        try:
            sym = symmetry_from_permutations(a, group, doc["symmetry"]["outcome_permutations"])
        except ValueError as exc:
            raise InvariantViolation(str(exc)) from exc
    return a, sym


def dumps(doc) -> str:
    return json.dumps(doc, indent=1, ensure_ascii=False)
