"""Bit-packed Pauli strings over a tracked qubit register.

A string is a pair of bit-vectors (x, z); site content decodes as
(0,0) -> I, (1,0) -> X, (0,1) -> Z, (1,1) -> Y.  Overall phases and signs are
not tracked: every observable computed downstream (occupation numbers,
GF(2)-rank entropies, fidelity via subgroup counting) is phase-independent.
"""

from __future__ import annotations

from enum import Enum

import numpy as np

from . import gf2


class PauliLetter(Enum):
    """Single-site Pauli content, closed under multiplication up to phase."""

    I = (0, 0)
    X = (1, 0)
    Z = (0, 1)
    Y = (1, 1)

    @property
    def x_bit(self) -> int:
        return self.value[0]

    @property
    def z_bit(self) -> int:
        return self.value[1]

    def __mul__(self, other: "PauliLetter") -> "PauliLetter":
        return PauliLetter((self.x_bit ^ other.x_bit, self.z_bit ^ other.z_bit))


class PauliString:
    """A phaseless n-site Pauli string with word-packed x/z bit-vectors."""

    __slots__ = ("n", "x", "z")

    def __init__(self, n: int, x_words: np.ndarray | None = None,
                 z_words: np.ndarray | None = None):
        if n < 0:
            raise ValueError("negative register width")
        self.n = n
        nw = gf2.n_words(n)
        self.x = np.zeros(nw, dtype=np.uint64) if x_words is None else np.asarray(x_words, dtype=np.uint64)
        self.z = np.zeros(nw, dtype=np.uint64) if z_words is None else np.asarray(z_words, dtype=np.uint64)
        if self.x.shape != (nw,) or self.z.shape != (nw,):
            raise ValueError("x/z word arrays do not match register width")

    # -- constructors ---------------------------------------------------

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(n)

    @classmethod
    def from_bits(cls, x_bits, z_bits) -> "PauliString":
        x_bits = np.asarray(x_bits, dtype=bool)
        z_bits = np.asarray(z_bits, dtype=bool)
        if x_bits.shape != z_bits.shape:
            raise ValueError("x and z bit-vectors differ in length")
        return cls(x_bits.size, gf2.pack_bits(x_bits), gf2.pack_bits(z_bits))

    @classmethod
    def single(cls, n: int, site: int, letter: PauliLetter) -> "PauliString":
        s = cls(n)
        s.set_content(site, letter)
        return s

    @classmethod
    def from_text(cls, text: str) -> "PauliString":
        """Parse the debug form, e.g. "XIYZ" with site 0 leftmost."""
        letters = [PauliLetter[c] for c in text]
        x = [let.x_bit for let in letters]
        z = [let.z_bit for let in letters]
        return cls.from_bits(x, z)

    # -- site access ----------------------------------------------------

    def _check_site(self, site: int) -> tuple[int, np.uint64]:
        if not 0 <= site < self.n:
            raise IndexError(f"site {site} out of range [0, {self.n})")
        return site // gf2.WORD, np.uint64(1) << np.uint64(site % gf2.WORD)

    def content_at(self, site: int) -> PauliLetter:
        w, msk = self._check_site(site)
        return PauliLetter((int(bool(self.x[w] & msk)), int(bool(self.z[w] & msk))))

    def set_content(self, site: int, letter: PauliLetter) -> None:
        w, msk = self._check_site(site)
        self.x[w] = (self.x[w] & ~msk) | (msk if letter.x_bit else np.uint64(0))
        self.z[w] = (self.z[w] & ~msk) | (msk if letter.z_bit else np.uint64(0))

    # -- algebra ----------------------------------------------------------

    def _check_width(self, other: "PauliString") -> None:
        if self.n != other.n:
            raise ValueError(f"width mismatch: {self.n} vs {other.n}")

    def multiply(self, other: "PauliString") -> "PauliString":
        """Group product up to phase: bitwise XOR of the x and z vectors."""
        self._check_width(other)
        return PauliString(self.n, self.x ^ other.x, self.z ^ other.z)

    __mul__ = multiply

    def commutes(self, other: "PauliString") -> bool:
        """True iff the symplectic form <a, b> = a.x b.z + a.z b.x vanishes mod 2."""
        self._check_width(other)
        par = gf2.popcount(self.x & other.z).sum() + gf2.popcount(self.z & other.x).sum()
        return int(par) % 2 == 0

    # -- support ----------------------------------------------------------

    def occupation_words(self) -> np.ndarray:
        """Packed occupation bits n_x = x OR z (nontrivial content indicator)."""
        return self.x | self.z

    def occupation_bits(self) -> np.ndarray:
        return gf2.unpack_bits(self.occupation_words(), self.n)

    def support_mask(self, region) -> np.ndarray:
        """Packed (x OR z) restricted to the given site set."""
        return self.occupation_words() & gf2.bit_mask(region, self.n)

    def is_trivial_on(self, region) -> bool:
        return not self.support_mask(region).any()

    def is_identity(self) -> bool:
        return not self.occupation_words().any()

    def weight(self) -> int:
        return int(gf2.popcount(self.occupation_words()).sum())

    # -- misc -------------------------------------------------------------

    def copy(self) -> "PauliString":
        return PauliString(self.n, self.x.copy(), self.z.copy())

    def __eq__(self, other) -> bool:
        return (isinstance(other, PauliString) and self.n == other.n
                and bool(np.array_equal(self.x, other.x)) and bool(np.array_equal(self.z, other.z)))

    def __hash__(self):
        return hash((self.n, self.x.tobytes(), self.z.tobytes()))

    def __str__(self) -> str:
        return "".join(self.content_at(i).name for i in range(self.n))

    def __repr__(self) -> str:
        return f"PauliString('{self}')"
