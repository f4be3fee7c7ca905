"""Word-packed GF(2) linear algebra.

Bit-vectors are stored little-endian in uint64 words: bit ``i`` of a vector
lives in word ``i // 64`` at position ``i % 64``.  All elimination routines
work on scratch copies; callers never see their inputs mutated.
"""

from __future__ import annotations

import numpy as np

WORD = 64


def n_words(n_bits: int) -> int:
    return (n_bits + WORD - 1) // WORD


def pack_bits(bits: np.ndarray) -> np.ndarray:
    """Pack a (..., n) boolean array into (..., ceil(n/64)) uint64 words."""
    bits = np.asarray(bits, dtype=bool)
    n = bits.shape[-1]
    nw = n_words(n)
    padded = np.zeros(bits.shape[:-1] + (nw * WORD,), dtype=bool)
    padded[..., :n] = bits
    # little-endian within each 64-bit word
    chunks = padded.reshape(padded.shape[:-1] + (nw, WORD))
    weights = (np.uint64(1) << np.arange(WORD, dtype=np.uint64))
    return (chunks.astype(np.uint64) * weights).sum(axis=-1, dtype=np.uint64)


def unpack_bits(words: np.ndarray, n_bits: int) -> np.ndarray:
    """Inverse of :func:`pack_bits`."""
    words = np.asarray(words, dtype=np.uint64)
    shifts = np.arange(WORD, dtype=np.uint64)
    bits = (words[..., :, None] >> shifts) & np.uint64(1)
    bits = bits.reshape(words.shape[:-1] + (-1,))
    return bits[..., :n_bits].astype(bool)


def popcount(words: np.ndarray) -> np.ndarray:
    return np.bitwise_count(words)


def bit_mask(sites, n_bits: int) -> np.ndarray:
    """Packed mask with the given bit positions set."""
    mask = np.zeros(n_words(n_bits), dtype=np.uint64)
    for s in sites:
        if not 0 <= s < n_bits:
            raise IndexError(f"bit {s} out of range [0, {n_bits})")
        mask[s // WORD] |= np.uint64(1) << np.uint64(s % WORD)
    return mask


def rank(matrix: np.ndarray) -> int:
    """GF(2) rank of a dense (m, n) binary matrix."""
    m = np.asarray(matrix, dtype=bool)
    if m.ndim != 2:
        raise ValueError("expected a 2-d matrix")
    return rank_packed(pack_bits(m), m.shape[1])


def rank_packed(rows: np.ndarray, n_bits: int) -> int:
    """GF(2) rank of packed rows (m, nw), considering the first n_bits columns."""
    rows = np.array(rows, dtype=np.uint64)  # scratch copy
    m = rows.shape[0]
    r = 0
    for col in range(n_bits):
        if r == m:
            break
        w, b = divmod(col, WORD)
        msk = np.uint64(1) << np.uint64(b)
        hits = np.nonzero(rows[r:, w] & msk)[0]
        if hits.size == 0:
            continue
        p = r + hits[0]
        if p != r:
            rows[[r, p]] = rows[[p, r]]
        below = r + 1 + np.nonzero(rows[r + 1:, w] & msk)[0]
        if below.size:
            rows[below] ^= rows[r]
        r += 1
    return r


def rank_on_sites(x_words: np.ndarray, z_words: np.ndarray, sites) -> int:
    """GF(2) rank of the symplectic rows restricted to the given site columns.

    Each site contributes two GF(2) coordinates (its x-bit and its z-bit).
    Row operations act on the full (x, z) rows, which leaves the row space of
    the restricted matrix unchanged, so pivoting only on the selected sites
    yields exactly the restricted rank.  Inputs are not modified.
    """
    x = np.array(x_words, dtype=np.uint64)
    z = np.array(z_words, dtype=np.uint64)
    m = x.shape[0]
    r = 0
    for s in sites:
        w, b = divmod(int(s), WORD)
        msk = np.uint64(1) << np.uint64(b)
        for arr in (x, z):
            if r == m:
                return r
            hits = np.nonzero(arr[r:, w] & msk)[0]
            if hits.size == 0:
                continue
            p = r + hits[0]
            if p != r:
                x[[r, p]] = x[[p, r]]
                z[[r, p]] = z[[p, r]]
            below = r + 1 + np.nonzero(arr[r + 1:, w] & msk)[0]
            if below.size:
                x[below] ^= x[r]
                z[below] ^= z[r]
            r += 1
    return r


def rank_on_sites_batched(x_words: np.ndarray, z_words: np.ndarray, sites,
                          row_mask: np.ndarray | None = None) -> np.ndarray:
    """Batched variant of :func:`rank_on_sites` over (B, m, nw) row stacks.

    All realizations run the elimination in lockstep with per-realization
    pivot counters; rows outside `row_mask` neither pivot nor get eliminated.
    Returns a (B,) int64 array of ranks.  Inputs are not modified.
    """
    x = np.array(x_words, dtype=np.uint64)
    z = np.array(z_words, dtype=np.uint64)
    B, m, _ = x.shape
    active = np.ones((B, m), dtype=bool) if row_mask is None else np.array(row_mask, dtype=bool)
    r = np.zeros(B, dtype=np.int64)
    idx = np.arange(m)[None, :]
    for s in sites:
        w, b = divmod(int(s), WORD)
        shift = np.uint64(b)
        for arr in (x, z):
            if (r >= m).all():
                return r
            bits = ((arr[:, :, w] >> shift) & np.uint64(1)).astype(bool) & active
            avail = bits & (idx >= r[:, None])
            has = avail.any(axis=1)
            if not has.any():
                continue
            piv = np.argmax(avail, axis=1)
            sub = np.nonzero(has)[0]
            rs, ps = r[sub], piv[sub]
            for arr2 in (x, z):
                tmp = arr2[sub, rs].copy()
                arr2[sub, rs] = arr2[sub, ps]
                arr2[sub, ps] = tmp
            tmp = active[sub, rs].copy()
            active[sub, rs] = active[sub, ps]
            active[sub, ps] = tmp
            bits = ((arr[:, :, w] >> shift) & np.uint64(1)).astype(bool) & active
            elim = bits & (idx > r[:, None]) & has[:, None]
            if elim.any():
                pivot_x = x[np.arange(B), np.minimum(r, m - 1)][:, None, :]
                pivot_z = z[np.arange(B), np.minimum(r, m - 1)][:, None, :]
                mask = elim[:, :, None].astype(np.uint64)
                x ^= mask * pivot_x
                z ^= mask * pivot_z
            r += has
    return r


def kernel_basis(matrix: np.ndarray) -> np.ndarray:
    """Basis of the left null space {c : c @ matrix = 0 over GF(2)}.

    Returns a (dim_kernel, m) boolean array of combination coefficients.
    Used by the oracle tests, where the kernel members are re-verified one by
    one against the definition.
    """
    m_bool = np.asarray(matrix, dtype=bool)
    m, n = m_bool.shape
    # Augment with an identity block and eliminate; rows that end up all-zero
    # in the original columns carry their combination in the identity block.
    aug = np.concatenate([m_bool, np.eye(m, dtype=bool)], axis=1)
    rows = pack_bits(aug)
    r = 0
    for col in range(n):
        if r == m:
            break
        w, b = divmod(col, WORD)
        msk = np.uint64(1) << np.uint64(b)
        hits = np.nonzero(rows[r:, w] & msk)[0]
        if hits.size == 0:
            continue
        p = r + hits[0]
        if p != r:
            rows[[r, p]] = rows[[p, r]]
        below = r + 1 + np.nonzero(rows[r + 1:, w] & msk)[0]
        if below.size:
            rows[below] ^= rows[r]
        r += 1
    full = unpack_bits(rows, n + m)
    zero_rows = ~full[:, :n].any(axis=1)
    return full[zero_rows, n:]
