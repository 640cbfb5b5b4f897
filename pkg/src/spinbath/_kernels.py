"""Compiled inner loops for the pair-swap operator (optional, needs numba)."""

from numba import njit


@njit(cache=True)
def apply_pair_swaps(x, out, diag, diff_idx, partner_idx, weights, offsets):
    """out = diag * x + sum_p w_p * SWAP_p x, on (dim, batch) complex arrays.

    diff_idx/partner_idx hold, per pair p (slice offsets[p]:offsets[p+1]), the
    basis states whose two swapped bits differ and their swap partners; states
    with equal bits are absorbed into diag.
    """
    dim, batch = x.shape
    for b in range(dim):
        d = diag[b]
        for c in range(batch):
            out[b, c] = d * x[b, c]
    for p in range(weights.shape[0]):
        w = weights[p]
        for q in range(offsets[p], offsets[p + 1]):
            tb = diff_idx[q]
            sb = partner_idx[q]
            for c in range(batch):
                out[tb, c] += w * x[sb, c]
    return out
