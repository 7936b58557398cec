"""Register simulation: encoded qubits and the charge-resolved oracle.

The encoded model tracks 2^n amplitudes over {|T> = 0, |S> = 1} per
molecule (row-major, molecule 0 is the most significant digit) and applies
ideal rotations plus the detuning-controlled Ising phase. The oracle model
tracks 3^n amplitudes over {|T(1,1)>, |S(1,1)>, |S(0,2)>} and accumulates
phases from explicit pairwise Coulomb sums, with each singlet's charge
amplitudes slaved to (cos theta(t), sin theta(t)). The two must agree
wherever the encoded picture claims to be exact.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .constants import HBAR_UEV_NS
from .electrostatics import LayoutGeometry, charge_sites, pair_coupling, sites_pair_energy
from .physics import DetuningWaveform, adiabatic_angle, sin_sq_mixing

_HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) / math.sqrt(2.0)
_PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
_PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)

ORACLE_MOLECULE_LIMIT = 4


@dataclass(frozen=True)
class EncodedRegisterState:
    """2^n amplitudes over the encoded {T, S} basis plus charge bookkeeping.

    charge_flags marks, per molecule, whether an active schedule step holds
    it at the charge-sensitive point ("02") or at idle ("11"). Operations
    return new states; nothing mutates in place.
    """

    amplitudes: np.ndarray
    charge_flags: tuple[str, ...]

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "charge_flags", tuple(self.charge_flags))
        n = len(self.charge_flags)
        if amps.shape != (2 ** n,):
            raise ValueError(f"need 2^{n} amplitudes, got shape {amps.shape}")
        if any(f not in ("11", "02") for f in self.charge_flags):
            raise ValueError("charge flags must be '11' or '02'")
        norm = float(np.sum(np.abs(amps) ** 2))
        if abs(norm - 1.0) > 1e-10:
            raise ValueError(f"state norm^2 = {norm!r} is not 1 within 1e-10")

    @property
    def n(self) -> int:
        return len(self.charge_flags)

    def bit(self, index: int, molecule: int) -> int:
        return (index >> (self.n - 1 - molecule)) & 1

    def with_flags(self, flags: dict[int, str]) -> "EncodedRegisterState":
        new = list(self.charge_flags)
        for m, f in flags.items():
            new[m] = f
        return EncodedRegisterState(self.amplitudes, tuple(new))


def product_state(labels: str) -> EncodedRegisterState:
    """Computational product state from a string over {T, S}, e.g. 'TS'."""
    if not labels or any(ch not in "TS" for ch in labels):
        raise ValueError("labels must be a non-empty string over {T, S}")
    n = len(labels)
    index = 0
    for ch in labels:
        index = index * 2 + (1 if ch == "S" else 0)
    amps = np.zeros(2 ** n, dtype=complex)
    amps[index] = 1.0
    return EncodedRegisterState(amps, ("11",) * n)


def molecule_probabilities(state: EncodedRegisterState, molecule: int) -> tuple[float, float]:
    """(P(T), P(S)) marginal for one molecule."""
    idx = np.arange(state.amplitudes.size)
    bits = (idx >> (state.n - 1 - molecule)) & 1
    p = np.abs(state.amplitudes) ** 2
    p_s = float(p[bits == 1].sum())
    return 1.0 - p_s, p_s


def state_json(state: EncodedRegisterState) -> list[list[float]]:
    """Amplitudes as (re, im) pairs, basis index in row-major molecule order."""
    return [[float(a.real), float(a.imag)] for a in state.amplitudes]


@dataclass(frozen=True)
class Rotation:
    """Single-molecule rotation available to the hardware.

    kind      "uz" (about Z), "uxz" (about an axis in the XZ plane at
              axis_angle from Z), "hadamard", or "euler_x" (X rotation
              composed as Uxz * Uz * Uxz).
    angle     rotation angle, rad (ignored for hadamard).
    axis_angle  XZ-plane axis tilt, rad (uxz only).
    duration  wall time charged to coherence budgets, ns.
    """

    kind: str
    angle: float = 0.0
    axis_angle: float = 0.0
    duration: float = 0.0

    def __post_init__(self):
        if self.kind not in ("uz", "uxz", "hadamard", "euler_x"):
            raise ValueError(f"unknown rotation kind {self.kind!r}")
        if not math.isfinite(self.angle) or not math.isfinite(self.axis_angle):
            raise ValueError("rotation angles must be finite")
        if self.duration < 0:
            raise ValueError("rotation duration must be >= 0")

    @staticmethod
    def z(angle: float, duration: float = 0.0) -> "Rotation":
        return Rotation("uz", angle=angle, duration=duration)

    @staticmethod
    def xz(axis_angle: float, angle: float, duration: float = 0.0) -> "Rotation":
        return Rotation("uxz", angle=angle, axis_angle=axis_angle, duration=duration)

    @staticmethod
    def hadamard(duration: float = 0.0) -> "Rotation":
        return Rotation("hadamard", duration=duration)

    @staticmethod
    def euler_x(angle: float, duration: float = 0.0) -> "Rotation":
        return Rotation("euler_x", angle=angle, duration=duration)

    def matrix(self) -> np.ndarray:
        if self.kind == "hadamard":
            return _HADAMARD.copy()
        if self.kind == "uz":
            return _axis_rotation(0.0, self.angle)
        if self.kind == "uxz":
            return _axis_rotation(self.axis_angle, self.angle)
        # euler_x: Uxz(pi/4, pi) Uz(phi) Uxz(pi/4, pi) = -Rx(phi). At a
        # 45-degree axis the three-step composition is exact for every phi.
        wing = _axis_rotation(math.pi / 4.0, math.pi)
        return wing @ _axis_rotation(0.0, self.angle) @ wing


def _axis_rotation(axis_angle: float, angle: float) -> np.ndarray:
    """exp(-i*angle/2 * (sin(axis)X + cos(axis)Z))."""
    n = math.sin(axis_angle) * _PAULI_X + math.cos(axis_angle) * _PAULI_Z
    return math.cos(angle / 2.0) * np.eye(2, dtype=complex) - 1j * math.sin(angle / 2.0) * n


def euler_x_sequence(angle: float) -> tuple[Rotation, Rotation, Rotation]:
    """The three hardware rotations whose product is euler_x(angle)."""
    wing = Rotation.xz(math.pi / 4.0, math.pi)
    return wing, Rotation.z(angle), wing


def apply_rotation(state: EncodedRegisterState, molecule: int,
                   rotation: Rotation) -> EncodedRegisterState:
    """Apply a single-molecule rotation. Rejected while charge-displaced."""
    _check_molecule(state, molecule)
    if state.charge_flags[molecule] == "02":
        raise ValueError(f"molecule {molecule} is held at +Ec/2; rotations need (1,1)")
    psi = state.amplitudes.reshape([2] * state.n)
    psi = np.moveaxis(psi, molecule, -1) @ rotation.matrix().T
    psi = np.moveaxis(psi, -1, molecule).reshape(-1)
    return EncodedRegisterState(psi, state.charge_flags)


def ising_phase(state: EncodedRegisterState, i: int, j: int, phi: float,
                adjacency: frozenset[tuple[int, int]]) -> EncodedRegisterState:
    """Multiply every |...S...S...> amplitude (S at i and j) by e^{i phi}.

    The coupling is mediated by simultaneous charge displacement, so only
    adjacent pairs may interact; non-adjacent pairs are a compile error
    upstream and rejected here.
    """
    _check_pair(state, i, j, adjacency)
    idx = np.arange(state.amplitudes.size)
    both = (((idx >> (state.n - 1 - i)) & 1) & ((idx >> (state.n - 1 - j)) & 1)).astype(bool)
    amps = state.amplitudes.copy()
    amps[both] *= np.exp(1j * phi)
    return EncodedRegisterState(amps, state.charge_flags)


def cnot(state: EncodedRegisterState, control: int, target: int,
         adjacency: frozenset[tuple[int, int]]) -> EncodedRegisterState:
    """CNOT as Hadamard(target), Ising pi phase, Hadamard(target)."""
    h = Rotation.hadamard()
    out = apply_rotation(state, target, h)
    out = ising_phase(out, control, target, math.pi, adjacency)
    return apply_rotation(out, target, h)


def _check_molecule(state: EncodedRegisterState, m: int):
    if not 0 <= m < state.n:
        raise ValueError(f"molecule index {m} out of range for n={state.n}")


def _check_pair(state, i, j, adjacency):
    _check_molecule(state, i)
    _check_molecule(state, j)
    if i == j:
        raise ValueError("pair indices must differ")
    if (min(i, j), max(i, j)) not in adjacency:
        raise ValueError(f"molecules {i} and {j} are not adjacent; "
                         "two-molecule operations need adjacency (no routing)")


def align_global_phase(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Return b rotated by the global phase that best matches a."""
    overlap = np.vdot(b, a)
    if abs(overlap) == 0.0:
        return b.copy()
    return b * (overlap / abs(overlap))


def states_equal(a: np.ndarray, b: np.ndarray, tol: float = 1e-10) -> bool:
    """Amplitude-wise equality up to a global phase."""
    return bool(np.max(np.abs(np.asarray(a) - align_global_phase(a, np.asarray(b)))) <= tol)


def phase_from_waveform(w: DetuningWaveform, g: LayoutGeometry, tc: float) -> float:
    """Ising phase (1/hbar) * integral of h_cc(theta(eps(t))) dt, rad.

    Adaptive quadrature per linear segment (relative error <= 1e-8); both
    molecules of the pair are assumed to follow the same waveform.
    """
    coupling_max = pair_coupling(g).coupling_max
    total = 0.0
    for t0, t1, _, _ in w.segments():
        val, _err = quad(lambda t: sin_sq_mixing(w.detuning_at(t), tc),
                         t0, t1, epsabs=1e-13, epsrel=1e-10, limit=200)
        total += val
    return coupling_max * total / HBAR_UEV_NS


# --- charge-resolved oracle (3 levels per molecule) ---

@dataclass(frozen=True)
class OracleState:
    """3^n amplitudes over {|T(1,1)> = 0, |S(1,1)> = 1, |S(0,2)> = 2}.

    Same row-major molecule ordering as the encoded register. Capped at
    four molecules; beyond that the oracle has no business running.
    """

    amplitudes: np.ndarray
    n: int

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        object.__setattr__(self, "amplitudes", amps)
        if self.n < 1 or self.n > ORACLE_MOLECULE_LIMIT:
            raise ValueError(f"oracle supports 1..{ORACLE_MOLECULE_LIMIT} molecules")
        if amps.shape != (3 ** self.n,):
            raise ValueError(f"need 3^{self.n} amplitudes, got shape {amps.shape}")
        norm = float(np.sum(np.abs(amps) ** 2))
        if abs(norm - 1.0) > 1e-10:
            raise ValueError(f"state norm^2 = {norm!r} is not 1 within 1e-10")


def _molecule_vectors(thetas) -> list[np.ndarray]:
    """Per-molecule (v_T, v_S~) triples-basis vectors at the given angles."""
    out = []
    for th in thetas:
        v_t = np.array([1.0, 0.0, 0.0], dtype=complex)
        v_s = np.array([0.0, math.cos(th), math.sin(th)], dtype=complex)
        out.append(np.stack([v_t, v_s]))
    return out


def _product_basis(thetas, n) -> np.ndarray:
    """(2^n, 3^n) matrix of product vectors for every logical string."""
    vecs = _molecule_vectors(thetas)
    rows = []
    for string in range(2 ** n):
        v = np.array([1.0], dtype=complex)
        for m in range(n):
            bit = (string >> (n - 1 - m)) & 1
            v = np.kron(v, vecs[m][bit])
        rows.append(v)
    return np.stack(rows)


def oracle_from_encoded(state: EncodedRegisterState, tc: float,
                        detunings) -> OracleState:
    """Embed an encoded state with each singlet hybridized at its detuning."""
    thetas = [adiabatic_angle(e, tc) for e in detunings]
    basis = _product_basis(thetas, state.n)
    return OracleState(state.amplitudes @ basis, state.n)


def oracle_to_encoded(oracle: OracleState, tc: float, detunings,
                      leakage_tol: float = 1e-9) -> np.ndarray:
    """Project back onto logical amplitudes; reject unexplained leakage."""
    thetas = [adiabatic_angle(e, tc) for e in detunings]
    basis = _product_basis(thetas, oracle.n)
    logical = basis.conj() @ oracle.amplitudes
    residual = float(np.sum(np.abs(oracle.amplitudes) ** 2) - np.sum(np.abs(logical) ** 2))
    if residual > leakage_tol:
        raise ValueError(f"oracle state has leakage {residual!r} outside the "
                         "adiabatic product basis")
    return logical


def oracle_evolve(oracle: OracleState, g: LayoutGeometry, tc: float,
                  waveforms, duration: float | None = None,
                  displacements=None) -> OracleState:
    """Evolve the 3^n state under the full pairwise Coulomb Hamiltonian.

    Each molecule m follows waveforms[m]; its singlet charge amplitudes are
    slaved to (cos theta_m(t), sin theta_m(t)) and every logical string
    accumulates exp(+i/hbar * integral of its summed pair energies), the
    energies coming from explicit charge-coordinate sums over all molecule
    pairs (no nearest-neighbour truncation here). displacements gives the
    in-line charge direction per molecule (+1 toward the higher index).
    """
    n = oracle.n
    if len(waveforms) != n:
        raise ValueError(f"need one waveform per molecule ({n})")
    if displacements is None:
        displacements = [+1] * n
    if duration is None:
        duration = max(w.times[-1] for w in waveforms)

    theta0 = [adiabatic_angle(w.detuning_at(0.0), tc) for w in waveforms]
    theta1 = [adiabatic_angle(w.detuning_at(duration), tc) for w in waveforms]
    logical = _product_basis(theta0, n).conj() @ oracle.amplitudes
    residual = float(np.sum(np.abs(oracle.amplitudes) ** 2) - np.sum(np.abs(logical) ** 2))
    if residual > 1e-9:
        raise ValueError(f"initial oracle state has leakage {residual!r} outside "
                         "the adiabatic product basis at t=0")

    # Per-pair charge-sector energies and occupation integrals. s_m(t) is
    # the molecule's (0,2) weight sin^2(theta_m); a pair's expected energy
    # is bilinear in (1-s, s) of each side, so three integrals per pair
    # (I_i, I_j, I_ij) cover every logical combination.
    weights = [lambda t, w=w: sin_sq_mixing(w.detuning_at(t), tc) for w in waveforms]
    breakpoints = sorted({0.0, duration, *(
        float(t) for w in waveforms for t in w.times if 0.0 < t < duration)})

    def integrate(f):
        total = 0.0
        for t0, t1 in zip(breakpoints, breakpoints[1:]):
            val, _ = quad(f, t0, t1, epsabs=1e-13, epsrel=1e-10, limit=200)
            total += val
        return total

    pair_terms = {}
    for i in range(n):
        for j in range(i + 1, n):
            sites = {}
            for m, occ in ((i, False), (i, True), (j, False), (j, True)):
                sites[(m, occ)] = charge_sites(g, m, occ, displacements[m])
            e = {(oi, oj): sites_pair_energy(g, sites[(i, oi)], sites[(j, oj)])
                 for oi in (False, True) for oj in (False, True)}
            integrals = {
                "i": integrate(weights[i]),
                "j": integrate(weights[j]),
                "ij": integrate(lambda t: weights[i](t) * weights[j](t)),
            }
            pair_terms[(i, j)] = (e, integrals)

    phases = np.zeros(2 ** n)
    for string in range(2 ** n):
        total = 0.0
        for (i, j), (e, integ) in pair_terms.items():
            si = (string >> (n - 1 - i)) & 1
            sj = (string >> (n - 1 - j)) & 1
            total += duration * e[(False, False)]
            if si:
                total += integ["i"] * (e[(True, False)] - e[(False, False)])
            if sj:
                total += integ["j"] * (e[(False, True)] - e[(False, False)])
            if si and sj:
                total += integ["ij"] * (e[(True, True)] - e[(True, False)]
                                        - e[(False, True)] + e[(False, False)])
        phases[string] = total / HBAR_UEV_NS

    evolved = logical * np.exp(1j * phases)
    return OracleState(evolved @ _product_basis(theta1, n), n)
