"""QPC charge readout and the two-round Bell-state measurement.

A quantum point contact near a molecule pair resolves how many singlets
were pulled into the doubly occupied charge state at +Ec/2: both still
(1,1) reads I_max, exactly one (0,2) reads I_mid, both (0,2) reads I_min.
Round one separates the Phi sector (never I_mid) from the Psi sector
(always I_mid); after Hadamards on both molecules, Psi+ lands in the Phi
sector while Psi- stays put, so a second read tells them apart exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .electrostatics import LayoutGeometry
from .physics import MoleculeParams, full_sweep, sweep_rate_window
from .register import (EncodedRegisterState, Rotation, apply_rotation, ising_phase,
                       molecule_probabilities, phase_from_waveform)

DEFAULT_READ_DURATION_NS = 1000.0

BELL_LABELS = ("phi_plus", "phi_minus", "psi_plus", "psi_minus")


@dataclass(frozen=True)
class QpcCurrents:
    """Detector current levels (arbitrary units, only ordering matters)."""

    i_max: float = 1.0
    i_mid: float = 0.5
    i_min: float = 0.0

    def __post_init__(self):
        if not (self.i_max > self.i_mid > self.i_min):
            raise ValueError("need i_max > i_mid > i_min")

    def value(self, level: str) -> float:
        return {"I_max": self.i_max, "I_mid": self.i_mid, "I_min": self.i_min}[level]


DEFAULT_CURRENTS = QpcCurrents()


@dataclass(frozen=True)
class QpcReading:
    level: str
    current: float
    post_state: EncodedRegisterState
    accumulated_phase: float = 0.0

    def __post_init__(self):
        if self.level not in ("I_max", "I_mid", "I_min"):
            raise ValueError(f"unknown current level {self.level!r}")


@dataclass(frozen=True)
class BellDecomposition:
    """Amplitudes in the Bell basis (Phi+/-, Psi+/-) of a two-molecule state."""

    phi_plus: complex
    phi_minus: complex
    psi_plus: complex
    psi_minus: complex

    @property
    def probabilities(self) -> dict[str, float]:
        return {label: float(abs(getattr(self, label)) ** 2) for label in BELL_LABELS}


_SQRT2 = math.sqrt(2.0)


def bell_state(label: str) -> EncodedRegisterState:
    """One of the four Bell states over two molecules."""
    tt, ts, st, ss = np.eye(4, dtype=complex)
    vectors = {
        "phi_plus": (tt + ss) / _SQRT2,
        "phi_minus": (tt - ss) / _SQRT2,
        "psi_plus": (ts + st) / _SQRT2,
        "psi_minus": (ts - st) / _SQRT2,
    }
    if label not in vectors:
        raise ValueError(f"unknown Bell label {label!r}; choose from {BELL_LABELS}")
    return EncodedRegisterState(vectors[label], ("11", "11"))


def decompose_bell(state: EncodedRegisterState) -> BellDecomposition:
    """Project a two-molecule state onto the Bell basis."""
    if state.n != 2:
        raise ValueError("Bell decomposition needs exactly two molecules")
    a = state.amplitudes
    return BellDecomposition(
        phi_plus=complex((a[0] + a[3]) / _SQRT2),
        phi_minus=complex((a[0] - a[3]) / _SQRT2),
        psi_plus=complex((a[1] + a[2]) / _SQRT2),
        psi_minus=complex((a[1] - a[2]) / _SQRT2),
    )


def _sample(rng: np.random.Generator, outcomes) -> str:
    """Draw from (label, probability) pairs; zero-weight branches excluded."""
    live = [(label, p) for label, p in outcomes if p > 1e-15]
    total = sum(p for _, p in live)
    u = rng.random() * total
    acc = 0.0
    for label, p in live:
        acc += p
        if u < acc:
            return label
    return live[-1][0]


def _project(state: EncodedRegisterState, keep: np.ndarray) -> EncodedRegisterState:
    amps = np.where(keep, state.amplitudes, 0.0)
    amps = amps / math.sqrt(float(np.sum(np.abs(amps) ** 2)))
    return EncodedRegisterState(amps, state.charge_flags)


def qpc_read_single(state: EncodedRegisterState, molecule: int,
                    rng: np.random.Generator,
                    adjacency: frozenset[tuple[int, int]] | None = None
                    ) -> tuple[str, EncodedRegisterState]:
    """Projective single-molecule read in the {T, S} basis.

    The molecule is swept charge-sensitive for the read and back afterwards,
    so the returned state is flagged (1,1). Neighbours must not be held at
    +Ec/2 while this happens (their charge would confound the QPC).
    """
    if state.charge_flags[molecule] == "02":
        raise ValueError(f"molecule {molecule} is already charge-displaced")
    if adjacency is not None:
        for a, b in adjacency:
            other = b if a == molecule else a if b == molecule else None
            if other is not None and state.charge_flags[other] == "02":
                raise ValueError(f"molecule {other} adjacent to read target "
                                 f"{molecule} is held at +Ec/2")
    p_t, p_s = molecule_probabilities(state, molecule)
    outcome = _sample(rng, (("T", p_t), ("S", p_s)))
    idx = np.arange(state.amplitudes.size)
    bits = (idx >> (state.n - 1 - molecule)) & 1
    post = _project(state, bits == (1 if outcome == "S" else 0))
    return outcome, post


def pair_read_probabilities(state: EncodedRegisterState, i: int, j: int) -> dict[str, float]:
    """Born probabilities of the three QPC levels for a pair read."""
    idx = np.arange(state.amplitudes.size)
    bi = (idx >> (state.n - 1 - i)) & 1
    bj = (idx >> (state.n - 1 - j)) & 1
    p = np.abs(state.amplitudes) ** 2
    return {
        "I_max": float(p[(bi == 0) & (bj == 0)].sum()),
        "I_mid": float(p[bi != bj].sum()),
        "I_min": float(p[(bi == 1) & (bj == 1)].sum()),
    }


def qpc_read_pair(state: EncodedRegisterState, i: int, j: int,
                  rng: np.random.Generator,
                  currents: QpcCurrents = DEFAULT_CURRENTS,
                  accumulated_phase: float = 0.0) -> QpcReading:
    """Three-level charge read of a swept molecule pair.

    Requires both molecules already held at +Ec/2 (their singlet weight in
    (0,2) is what the QPC sees). The post state stays charge-displaced;
    sweeping back is the caller's move.
    """
    if state.charge_flags[i] != "02" or state.charge_flags[j] != "02":
        raise ValueError("pair read needs both molecules swept to +Ec/2")
    probs = pair_read_probabilities(state, i, j)
    level = _sample(rng, tuple(probs.items()))
    idx = np.arange(state.amplitudes.size)
    bi = (idx >> (state.n - 1 - i)) & 1
    bj = (idx >> (state.n - 1 - j)) & 1
    keep = {"I_max": (bi == 0) & (bj == 0),
            "I_mid": bi != bj,
            "I_min": (bi == 1) & (bj == 1)}[level]
    return QpcReading(level, currents.value(level), _project(state, keep),
                      accumulated_phase)


@dataclass(frozen=True)
class BellOutcome:
    """Result of the two-round Bell measurement.

    classification is one of tt_or_phi_sector / ss_or_phi_sector (round one
    already projective, Phi+ and Phi- indistinguishable here), psi_plus or
    psi_minus. phi is the Ising phase accumulated over every measurement
    sweep; it never influences any outcome probability and is recorded
    rather than compensated.
    """

    round1: str
    round2: str | None
    classification: str
    phi: float
    reading1: QpcReading
    reading2: QpcReading | None
    final_state: EncodedRegisterState

    def __post_init__(self):
        if (self.round2 is not None) != (self.round1 == "I_mid"):
            raise ValueError("round2 must be present exactly when round1 is I_mid")


@lru_cache(maxsize=32)
def _measurement_sweep(g: LayoutGeometry, params: MoleculeParams,
                       safety_factor: float) -> tuple[float, float]:
    """(ramp duration, per-sweep Ising phase) of the minimal valid sweep."""
    window = sweep_rate_window(params, safety_factor)
    if window.is_empty:
        raise ValueError("adiabaticity window is empty; no valid measurement sweep")
    ramp = window.min_duration
    phi = phase_from_waveform(full_sweep(params, ramp), g, params.tunnel_coupling)
    return ramp, phi


def bell_measure(state: EncodedRegisterState, i: int, j: int,
                 g: LayoutGeometry, params: MoleculeParams,
                 rng: np.random.Generator, safety_factor: float = 10.0,
                 currents: QpcCurrents = DEFAULT_CURRENTS) -> BellOutcome:
    """Two-round QPC Bell measurement on adjacent molecules i, j.

    Round one sweeps both to +Ec/2 and reads. I_max or I_min means the Phi
    sector (or the matching product state) and the protocol stops. I_mid
    heralds the Psi sector: sweep back, Hadamard each molecule in turn
    (never both charge-displaced at once), sweep out and read again; Psi+
    has been rotated into the Phi sector while Psi- is immune to the
    rotation, so a second I_mid identifies Psi- with certainty.
    """
    adjacency = g.topology.adjacency()
    _, sweep_phi = _measurement_sweep(g, params, safety_factor)
    phi = 0.0

    def sweep_out(s):
        nonlocal phi
        s = ising_phase(s, i, j, sweep_phi, adjacency)
        phi += sweep_phi
        return s.with_flags({i: "02", j: "02"})

    def sweep_home(s):
        nonlocal phi
        s = s.with_flags({i: "11", j: "11"})
        s = ising_phase(s, i, j, sweep_phi, adjacency)
        phi += sweep_phi
        return s

    state = sweep_out(state)
    reading1 = qpc_read_pair(state, i, j, rng, currents, accumulated_phase=phi)

    if reading1.level != "I_mid":
        final = sweep_home(reading1.post_state)
        classification = ("tt_or_phi_sector" if reading1.level == "I_max"
                          else "ss_or_phi_sector")
        return BellOutcome(reading1.level, None, classification, phi,
                           reading1, None, final)

    state = sweep_home(reading1.post_state)
    hadamard = Rotation.hadamard()
    state = apply_rotation(state, i, hadamard)
    state = apply_rotation(state, j, hadamard)
    state = sweep_out(state)
    reading2 = qpc_read_pair(state, i, j, rng, currents, accumulated_phase=phi)
    final = sweep_home(reading2.post_state)
    classification = "psi_minus" if reading2.level == "I_mid" else "psi_plus"
    return BellOutcome(reading1.level, reading2.level, classification, phi,
                       reading1, reading2, final)
