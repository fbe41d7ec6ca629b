"""Single-particle model spaces, qubit ordering, and deformed-basis input."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.linalg import expm

ORTHO_TOL = 1e-12


class Species(str, Enum):
    PROTON = "proton"
    NEUTRON = "neutron"

    @classmethod
    def coerce(cls, value) -> "Species":
        if isinstance(value, Species):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown species {value!r}") from None


SPECIES_ORDER = (Species.PROTON, Species.NEUTRON)


def _is_half_integer(x: float) -> bool:
    return abs(2 * x - round(2 * x)) < 1e-9


@dataclass(frozen=True)
class Mode:
    """One single-particle state |j m> of a given species, mapped to one qubit."""

    species: Species
    j: float
    m: float
    index: int

    def __post_init__(self):
        if not (_is_half_integer(self.j) and _is_half_integer(self.m)):
            raise ValueError(f"j, m must be half-integers, got j={self.j}, m={self.m}")
        if abs(self.m) > self.j + 1e-9:
            raise ValueError(f"|m| <= j violated: j={self.j}, m={self.m}")
        if abs((self.j - self.m) - round(self.j - self.m)) > 1e-9:
            raise ValueError(f"j - m must be an integer: j={self.j}, m={self.m}")


class ModelSpace:
    """Ordered list of single-particle modes defining the qubit layout.

    Modes are grouped by species (all proton modes first) and sorted by
    ascending j, then ascending m, inside each species block.  The mode
    index is the global qubit index; qubit 0 is the least significant bit
    of a computational basis state.
    """

    def __init__(self, modes: Sequence[Mode]):
        self.modes: tuple[Mode, ...] = tuple(modes)
        self._offsets: dict[Species, int] = {}
        self._counts: dict[Species, int] = {}
        self._validate()

    def _validate(self):
        if not self.modes:
            raise ValueError("model space has no modes")
        for q, mode in enumerate(self.modes):
            if mode.index != q:
                raise ValueError(f"mode index {mode.index} at position {q}")
        seen: list[Species] = []
        for mode in self.modes:
            if not seen or seen[-1] != mode.species:
                if mode.species in seen:
                    raise ValueError("species blocks must be contiguous")
                seen.append(mode.species)
        order = [s for s in SPECIES_ORDER if s in seen]
        if seen != order:
            raise ValueError("proton block must precede neutron block")
        for sp in seen:
            block = [m for m in self.modes if m.species == sp]
            self._offsets[sp] = block[0].index
            self._counts[sp] = len(block)
            keys = [(m.j, m.m) for m in block]
            if keys != sorted(keys):
                raise ValueError("modes must be sorted by (j, m) within a species")
            present = set(keys)
            for (j, m) in keys:
                if (j, -m) not in present:
                    raise ValueError(f"time-reversed partner of (j={j}, m={m}) missing")

    @property
    def species(self) -> tuple[Species, ...]:
        return tuple(self._offsets)

    @property
    def n_qubits(self) -> int:
        return len(self.modes)

    def n_modes(self, species: Species) -> int:
        return self._counts[Species.coerce(species)]

    def offset(self, species: Species) -> int:
        """Global qubit index of the first mode of the species block."""
        return self._offsets[Species.coerce(species)]

    def block(self, species: Species) -> tuple[Mode, ...]:
        sp = Species.coerce(species)
        off = self.offset(sp)
        return self.modes[off:off + self.n_modes(sp)]

    def j_values(self, species: Species) -> tuple[float, ...]:
        """Distinct j values of the species block, ascending (the set P)."""
        return tuple(sorted({m.j for m in self.block(species)}))

    def m_values(self, species: Species) -> np.ndarray:
        """Diagonal of the canonical J_z block, in qubit order."""
        return np.array([m.m for m in self.block(species)])

    def species_of(self, qubit: int) -> Species:
        return self.modes[qubit].species

    def to_spec(self) -> list[tuple[str, float]]:
        out = []
        for sp in self.species:
            for j in self.j_values(sp):
                out.append((sp.value, j))
        return out

    def __eq__(self, other) -> bool:
        return isinstance(other, ModelSpace) and self.modes == other.modes

    def __repr__(self) -> str:
        parts = ", ".join(f"{sp.value}:{self.n_modes(sp)}" for sp in self.species)
        return f"ModelSpace({parts})"


def build_space(spec: Iterable[tuple] ) -> ModelSpace:
    """Build a ModelSpace from (species, j) pairs.

    Args:
        spec: iterable of (species, j) with j a positive half-integer.
            Repeated (species, j) entries are rejected; the mode ordering
            does not depend on the order of the input pairs.

    Returns:
        ModelSpace with sum(2j+1) modes per species.
    """
    entries = [(Species.coerce(sp), float(j)) for sp, j in spec]
    if not entries:
        raise ValueError("empty model-space spec")
    for sp, j in entries:
        if j <= 0 or not _is_half_integer(j):
            raise ValueError(f"j must be a positive half-integer, got {j}")
    if len(set(entries)) != len(entries):
        raise ValueError("duplicate (species, j) shell in model-space spec")
    modes: list[Mode] = []
    for sp in SPECIES_ORDER:
        js = sorted(j for s, j in entries if s == sp)
        for j in js:
            k = int(round(2 * j + 1))
            for t in range(k):
                modes.append(Mode(sp, j, -j + t, len(modes)))
    return ModelSpace(modes)


@dataclass
class DeformedBasis:
    """Per-species orthogonal transformation and Slater occupations.

    ``transform[sp]`` is the n x n matrix U whose column k holds the
    spherical-basis components of deformed mode k.  ``occupations[sp]``
    lists the occupied deformed-mode indices of the trial determinant.
    """

    transform: dict[Species, np.ndarray]
    occupations: dict[Species, tuple[int, ...]] = field(default_factory=dict)

    def __post_init__(self):
        self.transform = {Species.coerce(s): np.asarray(u, dtype=float)
                          for s, u in self.transform.items()}
        self.occupations = {Species.coerce(s): tuple(int(i) for i in occ)
                            for s, occ in self.occupations.items()}
        for sp, u in self.transform.items():
            if u.ndim != 2 or u.shape[0] != u.shape[1]:
                raise ValueError(f"{sp.value} matrix is not square: shape {u.shape}")
            resid = float(np.max(np.abs(u.T @ u - np.eye(u.shape[0]))))
            if resid > ORTHO_TOL:
                raise ValueError(
                    f"{sp.value} matrix is not orthogonal: max |U^T U - I| = {resid:.3e}")
            occ = self.occupations.get(sp, ())
            if len(set(occ)) != len(occ):
                raise ValueError(f"duplicate occupation for {sp.value}")
            if any(i < 0 or i >= u.shape[0] for i in occ):
                raise ValueError(f"occupation index out of range for {sp.value}")

    def n(self, species: Species) -> int:
        return self.transform[Species.coerce(species)].shape[0]

    def particle_numbers(self) -> dict[Species, int]:
        return {sp: len(self.occupations.get(sp, ())) for sp in self.transform}


def generate_deformation(space: ModelSpace, seed: int, strength: float,
                         occupations: Mapping[Species, Sequence[int]] | None = None,
                         ) -> DeformedBasis:
    """Synthetic deformed basis U = exp(strength * A), A seeded antisymmetric.

    The generator A only mixes modes within one species, so the deformation
    is orthogonal by construction and strength 0 gives the identity.  The
    same seed always reproduces the same matrices bit for bit.
    """
    if strength < 0:
        raise ValueError("strength must be >= 0")
    transform = {}
    for k, sp in enumerate(space.species):
        n = space.n_modes(sp)
        rng = np.random.default_rng((int(seed), k))
        a = rng.normal(size=(n, n))
        a = (a - a.T) / 2
        transform[sp] = expm(strength * a) if strength else np.eye(n)
    occ = {sp: tuple(v) for sp, v in (occupations or {}).items()}
    return DeformedBasis(transform=transform, occupations=occ)


def _species_doc(basis: DeformedBasis, sp: Species) -> dict:
    return {
        "species": sp.value,
        "n": basis.n(sp),
        "matrix": [[float(x) for x in row] for row in basis.transform[sp]],
        "occupations": list(basis.occupations.get(sp, ())),
    }


def save_deformation(basis: DeformedBasis, path: str | Path) -> Path:
    """Write one JSON document per species plus a manifest referencing both.

    Returns the manifest path.  For a single-species basis the manifest
    still gets written so that load_deformation round-trips either way.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    manifest = {}
    for sp in basis.transform:
        doc = _species_doc(basis, sp)
        spath = path.with_name(f"{path.stem}_{sp.value}.json")
        spath.write_text(json.dumps(doc, indent=1))
        manifest[sp.value] = spath.name
    path.write_text(json.dumps(manifest, indent=1))
    return path


def _parse_species_doc(doc: dict, source: str) -> tuple[Species, np.ndarray, tuple]:
    for key in ("species", "n", "matrix"):
        if key not in doc:
            raise ValueError(f"{source}: missing field {key!r}")
    sp = Species.coerce(doc["species"])
    n = int(doc["n"])
    matrix = np.array(doc["matrix"], dtype=float)
    if matrix.shape != (n, n):
        raise ValueError(f"{source}: matrix shape {matrix.shape} does not match n={n}")
    occ = tuple(int(i) for i in doc.get("occupations", ()))
    return sp, matrix, occ


def load_deformation(path: str | Path) -> DeformedBasis:
    """Load a deformed basis from a species document or a manifest.

    A species document carries the fields ``species``, ``n``, ``matrix``
    and ``occupations``; a manifest maps species names to such documents.
    Non-orthogonal matrices are rejected, reporting the residual.
    """
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: malformed JSON ({exc})") from None
    if not isinstance(doc, dict):
        raise ValueError(f"{path}: expected a JSON object")
    docs = []
    if "species" in doc:
        docs.append(_parse_species_doc(doc, str(path)))
    else:
        for key, ref in doc.items():
            sp = Species.coerce(key)
            sub = json.loads((path.parent / ref).read_text())
            parsed = _parse_species_doc(sub, str(path.parent / ref))
            if parsed[0] != sp:
                raise ValueError(f"{path}: manifest key {key} points at a "
                                 f"{parsed[0].value} document")
            docs.append(parsed)
    transform = {sp: mat for sp, mat, _ in docs}
    occupations = {sp: occ for sp, _, occ in docs}
    return DeformedBasis(transform=transform, occupations=occupations)
