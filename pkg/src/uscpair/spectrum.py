"""Diagonalization, eigenstate bookkeeping and STIRAP carrier derivation.

With the stray channel off, the static Hamiltonian is block diagonal:
the u level decouples, giving factorized ancilla states |n,u> with
energy -eps' + n*omega_c, while g and e hybridize with the mode into
dressed states Phi_j (indexed by ascending energy).  ``diagonalize``
exploits that structure exactly when present; otherwise it falls back
to a full diagonalization and classifies eigenvectors by their u-block
weight, labelling anything in between as mixed.

The g-e block conserves the parity (-1)^(a'a + |e><e|) for both
coupling forms, so every dressed state carries an exact parity label.
The two-tone drive flips the atom between u and g (Lambda) or u and e
(Vee) at fixed photon number, which makes half of each quasi-degenerate
pair dark: starting from |0,u>, Lambda pulses address even-parity
dressed states and Vee pulses odd-parity ones.  The "first excited
doublet" relevant for the Vee protocol is therefore the pair of lowest
odd dressed states, not simply the dressed states ranked second and
third by energy (an even state sits between them at strong coupling).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hilbert import SpaceDef
from .model import CONFIG_LAMBDA, CONFIG_VEE, CONFIGURATIONS, SystemParams

CLASSIFY_TOL = 1e-8
_PHASE_TOL = 1e-10

DOUBLET_REFERENCES = ("midpoint", "lower", "upper")


@dataclass
class EigenSystem:
    """Sorted eigendecomposition with family labels.

    energies ascend; states holds eigenvectors as columns, phase-fixed so
    the first sizable g-block amplitude (falling back to e, then u) is
    real positive.  labels[k] is ("rabi", j), ("ancilla", n) or
    ("mixed", k); parity[k] is the expectation of (-1)^(a'a + |e><e|),
    exactly +-1 for states confined to the g-e block.
    """

    space: SpaceDef
    energies: np.ndarray
    states: np.ndarray
    labels: tuple[tuple[str, int], ...]
    u_population: np.ndarray
    parity: np.ndarray

    def state(self, k: int) -> np.ndarray:
        return self.states[:, k]

    def column_of(self, family: str, index: int) -> int:
        for k, lab in enumerate(self.labels):
            if lab == (family, index):
                return k
        raise ValueError(f"no eigenstate labelled ({family!r}, {index})")

    def rabi_column(self, j: int) -> int:
        return self.column_of("rabi", j)

    def ancilla_column(self, n: int) -> int:
        return self.column_of("ancilla", n)

    @property
    def rabi_count(self) -> int:
        return sum(1 for lab in self.labels if lab[0] == "rabi")

    @property
    def mixed_count(self) -> int:
        return sum(1 for lab in self.labels if lab[0] == "mixed")

    def projector(self, k: int) -> np.ndarray:
        v = self.states[:, k]
        return np.outer(v, v.conj())

    def excited_doublet(self) -> tuple[int, int]:
        """Rabi indices (j_minus, j_plus) of the lowest two dressed states
        with parity opposite to the ground state.

        These are the states a u-e drive can reach from |0,u>; an
        intervening state of ground-state parity is skipped as dark.
        """
        cols = [(j, self.rabi_column(j)) for j in range(self.rabi_count)]
        if not cols:
            raise ValueError("no dressed states available (clean partition required)")
        ground_parity = self.parity[cols[0][1]]
        opposite = [j for j, k in cols[1:] if self.parity[k] * ground_parity < 0]
        if len(opposite) < 2:
            raise ValueError(
                "fewer than two drive-coupled excited dressed states found; "
                "increase n_max"
            )
        return opposite[0], opposite[1]


def _phase_fix(states: np.ndarray, space: SpaceDef) -> np.ndarray:
    """Rotate each column so its leading amplitude is real positive.

    The reference amplitude is the first g-block entry above tolerance,
    falling back to the e block and then the u block, so the virtual
    amplitudes c_jn = <n,g|Phi_j> come out with a deterministic sign.
    """
    order = np.concatenate(
        [
            np.arange(space.total_dim)[space.atom_slice("g")],
            np.arange(space.total_dim)[space.atom_slice("e")],
            np.arange(space.total_dim)[space.atom_slice("u")],
        ]
    )
    out = states.copy()
    for k in range(out.shape[1]):
        col = out[:, k]
        ref = next((col[i] for i in order if abs(col[i]) > _PHASE_TOL), None)
        if ref is None:
            continue
        out[:, k] = col * (abs(ref) / ref)
    return out


def _parity_diagonal(space: SpaceDef) -> np.ndarray:
    n = np.arange(space.n_max)
    sign = (-1.0) ** n
    return np.concatenate([sign, sign, -sign])  # u, g, e blocks


def diagonalize(h: np.ndarray, space: SpaceDef, *, classify_tol: float = CLASSIFY_TOL) -> EigenSystem:
    """Eigendecomposition with rabi/ancilla/mixed classification.

    If the u block decouples exactly (no stray coupling), the two blocks
    are diagonalized separately, which keeps the classification exact
    even through accidental degeneracies between the families.
    """
    dim = space.total_dim
    if h.shape != (dim, dim):
        raise ValueError(f"Hamiltonian shape {h.shape} does not match space dim {dim}")
    u_sl = space.atom_slice("u")
    ge = np.arange(space.n_max, dim)  # g and e blocks are contiguous
    u_idx = np.arange(u_sl.start, u_sl.stop)

    cross = h[np.ix_(u_idx, ge)]
    entries: list[tuple[float, int, tuple[str, int], np.ndarray]] = []
    if not np.any(cross):
        # exact block structure: ancillas are eigenstates of the u block
        hu = h[np.ix_(u_idx, u_idx)]
        if np.any(hu - np.diag(np.diagonal(hu))):
            wu, vu = np.linalg.eigh(hu)
            order = np.argsort(np.argmax(np.abs(vu), axis=0))  # label by photon index
            wu, vu = wu[order], vu[:, order]
        else:
            wu = np.diagonal(hu).real.copy()
            vu = np.eye(space.n_max, dtype=complex)
        for n in range(space.n_max):
            full = np.zeros(dim, complex)
            full[u_idx] = vu[:, n]
            entries.append((float(wu[n]), 1, ("ancilla", n), full))
        wr, vr = np.linalg.eigh(h[np.ix_(ge, ge)])
        for j in range(len(wr)):
            full = np.zeros(dim, complex)
            full[ge] = vr[:, j]
            entries.append((float(wr[j]), 0, ("rabi", j), full))
    else:
        w, v = np.linalg.eigh(h)
        u_weight = np.sum(np.abs(v[u_sl, :]) ** 2, axis=0)
        n_rabi = n_anc = n_mix = 0
        for k in range(dim):
            if u_weight[k] < classify_tol:
                lab = ("rabi", n_rabi)
                n_rabi += 1
            elif u_weight[k] > 1.0 - classify_tol:
                blk = np.abs(v[u_sl, k])
                lab = ("ancilla", int(np.argmax(blk)))
                n_anc += 1
            else:
                lab = ("mixed", n_mix)
                n_mix += 1
            entries.append((float(w[k]), 0, lab, v[:, k].copy()))

    # ascending energy; stable tie-break keeps the ordering deterministic
    entries.sort(key=lambda item: (item[0], item[1], item[2]))
    energies = np.array([e for e, _, _, _ in entries])
    states = np.column_stack([vec for _, _, _, vec in entries])
    labels = tuple(lab for _, _, lab, _ in entries)
    states = _phase_fix(states, space)
    u_population = np.sum(np.abs(states[u_sl, :]) ** 2, axis=0)
    par_diag = _parity_diagonal(space)
    parity = np.einsum("ik,i,ik->k", states.conj(), par_diag, states).real
    return EigenSystem(space, energies, states, labels, u_population, parity)


def diagonalize_static(params: SystemParams) -> EigenSystem:
    """Diagonalize the clean (stray-free) static Hamiltonian of params."""
    from .model import assemble_static

    return diagonalize(assemble_static(params.without_stray()), params.space())


def virtual_amplitude(es: EigenSystem, j: int, n: int) -> complex:
    """Photon-pair amplitude c_jn = <n,g|Phi_j> of a dressed state."""
    col = es.rabi_column(j)
    idx = es.space.index("g", n)
    return complex(es.states[idx, col])


def virtual_amplitudes(es: EigenSystem, j: int) -> np.ndarray:
    """All <n,g|Phi_j> for n = 0..n_max-1."""
    col = es.rabi_column(j)
    return es.states[es.space.atom_slice("g"), col].copy()


def stirap_carriers(
    es: EigenSystem,
    configuration: str,
    doublet_reference: str = "midpoint",
) -> tuple[float, float]:
    """Resonant carrier pair (omega_p, omega_s) for the STIRAP tones.

    Lambda: omega_p bridges |0,u> -> Phi_0 and omega_s = omega_p minus
    the |0,u> -> |2,u> spacing, so the two-photon condition targets the
    two-photon ancilla exactly.  Vee: omega_p bridges |0,u> down to the
    first drive-coupled excited doublet (midpoint by default, or either
    member) and omega_s = omega_p plus the ancilla spacing.
    """
    if configuration not in CONFIGURATIONS:
        raise ValueError(f"configuration = {configuration!r}, expected one of {CONFIGURATIONS}")
    if doublet_reference not in DOUBLET_REFERENCES:
        raise ValueError(
            f"doublet_reference = {doublet_reference!r}, expected one of {DOUBLET_REFERENCES}"
        )
    if es.mixed_count:
        raise ValueError(
            "carrier derivation needs the clean partition (no stray coupling); "
            f"{es.mixed_count} mixed eigenstates found"
        )
    e_anc0 = es.energies[es.ancilla_column(0)]
    e_anc2 = es.energies[es.ancilla_column(2)]
    pair_spacing = e_anc2 - e_anc0  # exactly 2*omega_c for the clean system
    if configuration == CONFIG_LAMBDA:
        e_phi0 = es.energies[es.rabi_column(0)]
        omega_p = e_phi0 - e_anc0
        omega_s = omega_p - pair_spacing
    else:
        j_minus, j_plus = es.excited_doublet()
        e_minus = es.energies[es.rabi_column(j_minus)]
        e_plus = es.energies[es.rabi_column(j_plus)]
        e_ref = {
            "midpoint": 0.5 * (e_minus + e_plus),
            "lower": e_minus,
            "upper": e_plus,
        }[doublet_reference]
        omega_p = e_anc0 - e_ref
        omega_s = omega_p + pair_spacing
    if omega_p <= 0 or omega_s <= 0:
        raise ValueError(
            f"derived carriers are not positive (omega_p = {omega_p}, "
            f"omega_s = {omega_s}); check the level layout"
        )
    return float(omega_p), float(omega_s)
