"""Channels with a prescribed peripheral (unit-modulus) spectrum.

A cycle block (n, d_c, mu) acts on n registers of dimension d_c: pinch onto
the block diagonal, conjugate by the unitary W = diag(mu), advance one
register cyclically.  The resulting channel is CPTP and unital, and each
cycle contributes the peripheral multiset {mu_k conj(mu_l) exp(2 pi i m / n)}
over all k, l in [d_c] and m in Z_n, for n * d_c^2 values in total.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np

from .channel import Channel
from .linalg import SPECTRUM_MATCH_TOL, SpectrumMultiset, as_complex_values, eig_multiset

UNIT_MODULUS_TOL = 1e-12


@dataclass(frozen=True)
class CycleBlock:
    """One cycle: length n, register dimension d, unit-modulus phases mu."""

    n: int
    d: int
    mu: tuple[complex, ...]

    def __post_init__(self):
        if self.n < 1 or self.d < 1:
            raise ValueError("cycle length and dimension must be positive")
        mu = as_complex_values(self.mu, name="mu")
        if len(mu) != self.d:
            raise ValueError(f"need {self.d} phases, got {len(mu)}")
        for m in mu:
            if abs(abs(m) - 1.0) > UNIT_MODULUS_TOL:
                raise ValueError(f"phase {m} is not unit modulus within {UNIT_MODULUS_TOL}")
        object.__setattr__(self, "mu", mu)

    def predicted(self) -> tuple[complex, ...]:
        out = []
        for m in range(self.n):
            root = cmath.exp(2j * cmath.pi * m / self.n)
            for mk in self.mu:
                for ml in self.mu:
                    out.append(mk * ml.conjugate() * root)
        return tuple(out)


@dataclass(frozen=True)
class CycleSpec:
    cycles: tuple[CycleBlock, ...]

    def __post_init__(self):
        if not self.cycles:
            raise ValueError("need at least one cycle")
        object.__setattr__(self, "cycles", tuple(self.cycles))

    @property
    def dimension(self) -> int:
        return sum(c.n * c.d for c in self.cycles)

    def predicted_peripheral(self) -> SpectrumMultiset:
        vals: list[complex] = []
        for c in self.cycles:
            vals.extend(c.predicted())
        return SpectrumMultiset(tuple(vals))


def synth_cycles(spec: CycleSpec) -> Channel:
    """Unital CPTP map whose peripheral spectrum is the predicted multiset.

    One Kraus operator per cycle slot: embed register k, apply diag(mu),
    re-embed at register k+1 mod n.  Off-diagonal blocks between slots are
    annihilated, which contributes the kernel part of the spectrum.
    """
    d = spec.dimension
    kraus = []
    offset = 0
    for c in spec.cycles:
        w = np.diag(np.array(c.mu, dtype=complex))
        starts = [offset + k * c.d for k in range(c.n)]
        for k in range(c.n):
            src = starts[k]
            dst = starts[(k + 1) % c.n]
            op = np.zeros((d, d), dtype=complex)
            op[dst : dst + c.d, src : src + c.d] = w
            kraus.append(op)
        offset += c.n * c.d
    return Channel(d, kraus=kraus)


@dataclass(frozen=True)
class PeripheralSpectrum:
    """Unit-modulus part of a spectrum, phases projected onto the circle."""

    phases: SpectrumMultiset
    raw: tuple[complex, ...]
    moduli: tuple[float, ...]


def peripheral_spectrum(channel: Channel, tol: float = SPECTRUM_MATCH_TOL) -> PeripheralSpectrum:
    spectrum = eig_multiset(channel.superop)
    raw = tuple(v for v in spectrum if abs(v) >= 1.0 - tol)
    projected = tuple(v / abs(v) for v in raw)
    return PeripheralSpectrum(
        phases=SpectrumMultiset(projected, tol),
        raw=raw,
        moduli=tuple(abs(v) for v in raw),
    )


def jll_counterexample_channel(d: int) -> Channel:
    """Primitive channel violating the classical moment divisibility pattern.

    Kraus operators |j><j+1 mod d| / sqrt(2) for j < d plus the diagonal
    phase operator diag(exp(i pi k / d)) / sqrt(2).  For d > 2 the second
    moment vanishes while the first is positive, so the classical necessary
    condition mu_1 > 0 => mu_2 > 0 fails even though the map is a channel.
    """
    if d < 2:
        raise ValueError("need d >= 2")
    kraus = []
    for j in range(d):
        op = np.zeros((d, d), dtype=complex)
        op[j, (j + 1) % d] = 1.0 / np.sqrt(2.0)
        kraus.append(op)
    phases = np.exp(1j * np.pi * np.arange(d) / d) / np.sqrt(2.0)
    kraus.append(np.diag(phases))
    return Channel(d, kraus=kraus)
