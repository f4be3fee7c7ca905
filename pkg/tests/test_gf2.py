import numpy as np

from radperc import gf2


def dense_rank_reference(M):
    """Textbook elimination on a dense 0/1 matrix, no packing."""
    R = (np.array(M, dtype=np.uint8) % 2).copy()
    m, n = R.shape
    rank = 0
    for col in range(n):
        rows = np.nonzero(R[rank:, col])[0]
        if rows.size == 0:
            continue
        piv = rank + rows[0]
        R[[rank, piv]] = R[[piv, rank]]
        for r in range(m):
            if r != rank and R[r, col]:
                R[r] ^= R[rank]
        rank += 1
        if rank == m:
            break
    return rank


def test_pack_unpack_roundtrip():
    rng = np.random.default_rng(0)
    for n in (1, 37, 64, 65, 130):
        bits = rng.integers(0, 2, size=(5, n)).astype(bool)
        assert np.array_equal(gf2.unpack_bits(gf2.pack_bits(bits), n), bits)


def test_rank_matches_reference():
    rng = np.random.default_rng(1)
    for _ in range(40):
        m = int(rng.integers(1, 12))
        n = int(rng.integers(1, 90))
        M = rng.integers(0, 2, size=(m, n))
        assert gf2.rank(M) == dense_rank_reference(M)


def test_rank_on_sites_matches_extracted_submatrix():
    rng = np.random.default_rng(2)
    for _ in range(40):
        m = int(rng.integers(1, 14))
        n = int(rng.integers(2, 80))
        x = rng.integers(0, 2, size=(m, n)).astype(bool)
        z = rng.integers(0, 2, size=(m, n)).astype(bool)
        sites = sorted(rng.choice(n, size=int(rng.integers(1, n)), replace=False))
        got = gf2.rank_on_sites(gf2.pack_bits(x), gf2.pack_bits(z), sites)
        sub = np.concatenate([x[:, sites], z[:, sites]], axis=1)
        assert got == dense_rank_reference(sub)


def test_rank_on_sites_batched_matches_single():
    rng = np.random.default_rng(3)
    B, m, n = 17, 9, 70
    x = rng.integers(0, 2, size=(B, m, n)).astype(bool)
    z = rng.integers(0, 2, size=(B, m, n)).astype(bool)
    xp = np.stack([gf2.pack_bits(x[b]) for b in range(B)])
    zp = np.stack([gf2.pack_bits(z[b]) for b in range(B)])
    sites = [0, 3, 5, 20, 63, 64, 69]
    mask = rng.integers(0, 2, size=(B, m)).astype(bool)
    got = gf2.rank_on_sites_batched(xp, zp, sites, row_mask=mask)
    for b in range(B):
        want = gf2.rank_on_sites(xp[b][mask[b]], zp[b][mask[b]], sites)
        assert got[b] == want
    got_full = gf2.rank_on_sites_batched(xp, zp, sites)
    for b in range(B):
        assert got_full[b] == gf2.rank_on_sites(xp[b], zp[b], sites)


def test_kernel_basis():
    rng = np.random.default_rng(4)
    for _ in range(20):
        m = int(rng.integers(1, 10))
        n = int(rng.integers(1, 20))
        M = rng.integers(0, 2, size=(m, n)).astype(bool)
        K = gf2.kernel_basis(M)
        assert K.shape[0] == m - dense_rank_reference(M)
        for coeffs in K:
            combo = np.logical_xor.reduce(M[coeffs], axis=0) if coeffs.any() \
                else np.zeros(n, dtype=bool)
            assert not combo.any()
        if K.shape[0]:
            assert dense_rank_reference(K) == K.shape[0]
