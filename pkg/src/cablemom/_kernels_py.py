"""Pure-numpy versions of the compiled kernels."""

import numpy as np


def reflected_block_sum(C, obs, src):
    """out[k, r, c] = sum_ab C[k, a, b] * obs[k, a, r] * src[k, b, c]."""
    tmp = np.einsum("kab,kar->kbr", C, obs)
    return np.einsum("kbr,kbc->krc", tmp, src)
