"""Composite Hilbert space: three atomic levels times a truncated mode.

Ordering convention used everywhere in this package: composite index
``atom * n_max + n`` with atom levels u=0, g=1, e=2 (atom-major blocks,
photon number minor).  Operators are dense complex numpy arrays; states
are 1-D complex vectors.  ``SpaceDef`` is the only piece of shared
bookkeeping, everything else is plain arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ATOM_LEVELS = ("u", "g", "e")
_ATOM_INDEX = {name: k for k, name in enumerate(ATOM_LEVELS)}


@dataclass(frozen=True)
class SpaceDef:
    """Dimensions of the composite space (3 atomic levels x n_max Fock states)."""

    n_max: int = 20

    def __post_init__(self) -> None:
        if self.n_max < 3:
            raise ValueError(
                f"n_max = {self.n_max}: the pair-conversion protocols address "
                "Fock state |2>, so n_max >= 3 is required"
            )

    @property
    def atom_dim(self) -> int:
        return 3

    @property
    def total_dim(self) -> int:
        return 3 * self.n_max

    def index(self, atom: str, n: int) -> int:
        """Composite index of the basis state |atom, n>."""
        if atom not in _ATOM_INDEX:
            raise ValueError(f"unknown atomic level {atom!r}, expected one of {ATOM_LEVELS}")
        if not 0 <= n < self.n_max:
            raise ValueError(
                f"photon index {n} outside the truncated mode space (n_max = {self.n_max})"
            )
        return _ATOM_INDEX[atom] * self.n_max + n

    def atom_slice(self, atom: str) -> slice:
        """Index range of one atomic block."""
        k = _ATOM_INDEX[atom]
        return slice(k * self.n_max, (k + 1) * self.n_max)


def mode_annihilation(space: SpaceDef) -> np.ndarray:
    """Annihilation operator of the bare mode, <n-1|a|n> = sqrt(n)."""
    return np.diag(np.sqrt(np.arange(1, space.n_max, dtype=float)), 1).astype(complex)


def annihilation(space: SpaceDef) -> np.ndarray:
    """Cavity annihilation on the composite space (identity on the atom)."""
    return np.kron(np.eye(3), mode_annihilation(space))


def creation(space: SpaceDef) -> np.ndarray:
    return annihilation(space).conj().T


def number(space: SpaceDef) -> np.ndarray:
    """Photon number a'a on the composite space."""
    return np.kron(np.eye(3), np.diag(np.arange(space.n_max, dtype=float))).astype(complex)


def photon_numbers(space: SpaceDef) -> np.ndarray:
    """Diagonal of the photon-number operator as a real vector."""
    return np.tile(np.arange(space.n_max, dtype=float), 3)


def atom_matrix(frm: str, to: str) -> np.ndarray:
    """Bare 3x3 atomic operator |to><frm|."""
    m = np.zeros((3, 3), complex)
    m[_ATOM_INDEX[to], _ATOM_INDEX[frm]] = 1.0
    return m


def atomic_transition(space: SpaceDef, frm: str, to: str) -> np.ndarray:
    """|to><frm| on the atom, identity on the mode.

    Hermitian conjugation swaps the arguments: atomic_transition(space, x, y)
    is exactly the dagger of atomic_transition(space, y, x).
    """
    return np.kron(atom_matrix(frm, to), np.eye(space.n_max))


def atomic_projector(space: SpaceDef, level: str) -> np.ndarray:
    return atomic_transition(space, level, level)


def compose(atom_op: np.ndarray, mode_op: np.ndarray) -> np.ndarray:
    """Kronecker product in this package's ordering (atom major)."""
    return np.kron(atom_op, mode_op)


def basis_state(space: SpaceDef, atom: str, n: int) -> np.ndarray:
    """Unit vector |atom, n>; photon indices beyond the truncation are an error."""
    vec = np.zeros(space.total_dim, complex)
    vec[space.index(atom, n)] = 1.0
    return vec


def fock_projector(space: SpaceDef, n: int) -> np.ndarray:
    """Projector 1_atom x |n><n|."""
    if not 0 <= n < space.n_max:
        raise ValueError(
            f"photon index {n} outside the truncated mode space (n_max = {space.n_max})"
        )
    diag = np.zeros(space.total_dim)
    for atom in ATOM_LEVELS:
        diag[space.index(atom, n)] = 1.0
    return np.diag(diag).astype(complex)


def identity(space: SpaceDef) -> np.ndarray:
    return np.eye(space.total_dim, dtype=complex)
