"""Quantum-state variant of the probe protocol, on a dense state vector.

The ancilla starts in |+>, a controlled gate applies e^{i theta X} to the
system when the ancilla is up, and a Hadamard on the ancilla turns its
(sigma_z, sigma_y) expectations into (Re F, Im F).  This differs from the
classical-ensemble readout only in where the basis change sits: there the
coherence (sigma_x, sigma_y) is read directly, here the extra Hadamard after
the controlled gate moves the real part onto sigma_z.  For observables built
from commuting z-type products the controlled evolution factorizes exactly;
an m-step product formula is also provided so that the first-order error of
non-commuting mixed-axis observables can be measured directly.

Basis convention: system site n (1-based) maps to bit N - n of the index,
bit value 0 meaning spin up (+1); the ancilla bit is the most significant,
0 meaning up.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError, SizeError
from .spin_model import ModelParams, ObservableSpec, energy, SpinConfig

QUANTUM_SITES_LIMIT = 14
TROTTER_SITES_LIMIT = 6

_PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True)
class PauliObservable:
    """X = a + b * sum of Pauli-string terms; each factor is (site, axis)."""

    a: float
    b: float
    terms: tuple  # of tuples of (site, axis)
    n_sites: int

    def __post_init__(self):
        terms = tuple(tuple((int(s), str(ax)) for s, ax in t) for t in self.terms)
        for t in terms:
            for s, ax in t:
                if not 1 <= s <= self.n_sites:
                    raise InputError(f"site {s} outside 1..{self.n_sites}")
                if ax not in ("x", "y", "z"):
                    raise InputError(f"unknown Pauli axis {ax!r}")
        object.__setattr__(self, "terms", terms)

    @property
    def is_diagonal(self) -> bool:
        return all(ax == "z" for t in self.terms for _, ax in t)

    @classmethod
    def from_spec(cls, obs: ObservableSpec, n_sites: int) -> "PauliObservable":
        terms = tuple(tuple((i, "z") for i in t) for t in obs.terms)
        return cls(a=obs.a, b=obs.b, terms=terms, n_sites=n_sites)


def noncommuting_test_observable(n_sites: int) -> PauliObservable:
    """Mixed-axis two-site products around the ring; adjacent terms clash."""
    if n_sites < 2:
        raise InputError("need at least two sites")
    axes = ("x", "z", "y")
    terms = []
    for i in range(1, n_sites + 1):
        j = i % n_sites + 1
        ax = axes[(i - 1) % len(axes)]
        terms.append(((i, ax), (j, ax)))
    return PauliObservable(a=0.0, b=1.0, terms=tuple(terms), n_sites=n_sites)


@dataclass(frozen=True)
class DiagonalEnsemble:
    """Probabilities over computational basis states (e.g. a thermal state)."""

    probs: np.ndarray
    n_sites: int

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.size != 1 << self.n_sites:
            raise InputError("probability vector must have length 2^N")
        if abs(p.sum() - 1.0) > 1e-9 or p.min() < -1e-12:
            raise InputError("probabilities must be non-negative and sum to 1")
        object.__setattr__(self, "probs", p)


@dataclass(frozen=True)
class QuantumRegister:
    """Ancilla (MSB) plus N system qubits as a dense unit-norm amplitude vector."""

    amplitudes: np.ndarray
    n_sites: int

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex)
        if amp.size != 1 << (self.n_sites + 1):
            raise InputError("register must have length 2^(N+1) (ancilla + system)")
        if abs(np.linalg.norm(amp) - 1.0) > 1e-12:
            raise InputError("register must be normalized")
        object.__setattr__(self, "amplitudes", amp)

    @classmethod
    def from_system_state(cls, psi, n_sites: int) -> "QuantumRegister":
        """Ancilla prepared in |+> tensored with a normalized system state."""
        psi = np.asarray(psi, dtype=complex)
        if psi.size != 1 << n_sites:
            raise InputError("system state must have length 2^N")
        norm = np.linalg.norm(psi)
        if norm == 0:
            raise InputError("system state must be non-zero")
        half = psi / (norm * math.sqrt(2.0))
        return cls(amplitudes=np.concatenate([half, half]), n_sites=n_sites)

    @classmethod
    def from_basis_state(cls, index: int, n_sites: int) -> "QuantumRegister":
        psi = np.zeros(1 << n_sites, dtype=complex)
        psi[index] = 1.0
        return cls.from_system_state(psi, n_sites)


def basis_spins(n_sites: int) -> np.ndarray:
    """(2^N, N) array of +-1 spin values; bit 0 of the index is site N."""
    idx = np.arange(1 << n_sites, dtype=np.int64)
    shifts = np.arange(n_sites - 1, -1, -1, dtype=np.int64)
    return (1 - 2 * ((idx[:, None] >> shifts[None, :]) & 1)).astype(np.int8)


def thermal_diagonal_ensemble(model: ModelParams) -> DiagonalEnsemble:
    """Gibbs weights of a diagonal Hamiltonian over the computational basis."""
    if model.N > QUANTUM_SITES_LIMIT:
        raise SizeError(f"dense thermal ensemble limited to N <= {QUANTUM_SITES_LIMIT}")
    if model.beta < 0:
        raise InputError("beta must be non-negative")
    spins = basis_spins(model.N)
    energies = np.array([energy(model, SpinConfig(row)) for row in spins])
    w = np.exp(-model.beta * (energies - energies.min()))
    return DiagonalEnsemble(probs=w / w.sum(), n_sites=model.N)


def _diagonal_phase(obs: PauliObservable, theta: float, steps: int | None) -> np.ndarray:
    """Accumulated phase per basis state from the gate walk.

    Each term contributes theta * b / m times its z-product, repeated for m
    steps; for commuting diagonal terms any m reproduces e^{i theta X}
    exactly, which is asserted by tests rather than assumed here.
    """
    spins = basis_spins(obs.n_sites).astype(np.float64)
    m = 1 if steps is None else int(steps)
    if m < 1:
        raise InputError("trotter steps must be at least 1")
    phase = np.full(spins.shape[0], theta * obs.a)
    step_angle = theta * obs.b / m
    for _ in range(m):
        for term in obs.terms:
            prod = np.ones(spins.shape[0])
            for site, _ax in term:
                prod = prod * spins[:, site - 1]
            phase += step_angle * prod
    return phase


def quantum_probe(state, obs, theta: float,
                  trotter_steps: int | None = None) -> tuple[float, float]:
    """Ancilla readout (<sigma_z>, <sigma_y>) = (Re F, Im F) after the circuit.

    ``state`` is a QuantumRegister (ancilla included), a DiagonalEnsemble, or
    a plain system state vector.  ``obs`` may be an ObservableSpec (z-type by
    construction) or a diagonal PauliObservable; off-diagonal observables are
    outside this readout scheme (see the product-formula error probe).
    ``trotter_steps=None`` applies the full controlled phase in one pass.
    """
    if isinstance(obs, ObservableSpec):
        n_sites = state.n_sites if hasattr(state, "n_sites") else None
        if n_sites is None:
            raise InputError("pass a register or ensemble with n_sites")
        pauli = PauliObservable.from_spec(obs, n_sites)
    else:
        pauli = obs
    if not pauli.is_diagonal:
        raise InputError("quantum_probe reads out diagonal observables only")
    if pauli.n_sites > QUANTUM_SITES_LIMIT:
        raise SizeError(f"dense register limited to N <= {QUANTUM_SITES_LIMIT}")

    if isinstance(state, DiagonalEnsemble):
        phase = _diagonal_phase(pauli, theta, trotter_steps)
        return (float(state.probs @ np.cos(phase)), float(state.probs @ np.sin(phase)))

    if not isinstance(state, QuantumRegister):
        state = QuantumRegister.from_system_state(np.asarray(state, dtype=complex),
                                                  pauli.n_sites)
    phase = _diagonal_phase(pauli, theta, trotter_steps)
    dim = 1 << pauli.n_sites
    up = state.amplitudes[:dim] * np.exp(1j * phase)  # controlled phase on ancilla-up
    down = state.amplitudes[dim:]
    h_up = (up + down) / math.sqrt(2.0)
    h_down = (up - down) / math.sqrt(2.0)
    sz = float((np.abs(h_up) ** 2 - np.abs(h_down) ** 2).sum())
    sy = float(2.0 * np.imag(np.conj(h_up) @ h_down))
    return sz, sy


# ---------------------------------------------------------------------------
# product-formula error probe
# ---------------------------------------------------------------------------


def _term_matrix(term, n_sites: int) -> np.ndarray:
    ops = [np.eye(2, dtype=complex)] * n_sites
    for site, ax in term:
        ops[site - 1] = ops[site - 1] @ _PAULI[ax]
    out = ops[0]
    for op in ops[1:]:
        out = np.kron(out, op)
    return out


def trotter_error_probe(obs: PauliObservable, theta: float, steps: int) -> float:
    """Spectral-norm distance between e^{i theta X} and the m-step product.

    Every Pauli string P squares to the identity, so each factor is the
    closed form cos(alpha) I + i sin(alpha) P with alpha = theta b / m; the
    exact exponential comes from an eigendecomposition of the dense X.
    Commuting terms give zero error at any m; non-commuting ones decay as
    O(1/m).
    """
    if obs.n_sites > TROTTER_SITES_LIMIT:
        raise SizeError(f"dense error probe limited to N <= {TROTTER_SITES_LIMIT}")
    if steps < 1:
        raise InputError("steps must be at least 1")
    dim = 1 << obs.n_sites
    terms = [_term_matrix(t, obs.n_sites) for t in obs.terms]
    x = obs.a * np.eye(dim, dtype=complex) + obs.b * sum(terms)
    vals, vecs = np.linalg.eigh(x)
    exact = (vecs * np.exp(1j * theta * vals)) @ vecs.conj().T
    alpha = theta * obs.b / steps
    step = np.eye(dim, dtype=complex)
    for p in terms:
        step = (math.cos(alpha) * np.eye(dim) + 1j * math.sin(alpha) * p) @ step
    approx = np.linalg.matrix_power(step, steps) * np.exp(1j * theta * obs.a)
    return float(np.linalg.norm(exact - approx, 2))
