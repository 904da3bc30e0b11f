"""Counter-based standard normal draws.

Every normal variate is a pure function of ``(seed, replicate, stream, j)``:
the Philox4x64 key is ``(seed, replicate)``, the stream id occupies the third
counter word and ``j`` is the position in the raw output sequence.  Raw words
are mapped to the open unit interval and pushed through the inverse normal
CDF, so no rejection sampling can make a coordinate depend on its
neighbours.  Generating ``J`` coordinates always reproduces any shorter
prefix bit for bit, whatever the batch layout or thread count.
"""

import numpy as np
from scipy.special import ndtri

_MASK64 = (1 << 64) - 1
_INV_2_53 = 2.0 ** -53


def _raw_words(seed, replicate, stream, count):
    bitgen = np.random.Philox(
        key=np.array([seed & _MASK64, replicate & _MASK64], dtype=np.uint64),
        counter=np.array([0, 0, stream & _MASK64, 0], dtype=np.uint64),
    )
    return bitgen.random_raw(count)


def uniforms(seed, replicate, count, stream=0):
    """Uniform(0, 1) draws, never exactly 0 or 1."""
    raw = _raw_words(seed, replicate, stream, count)
    return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * _INV_2_53


def standard_normals(seed, replicate, count, stream=0):
    """``count`` i.i.d. N(0, 1) variates for one replicate and stream."""
    if count == 0:
        return np.empty(0)
    return ndtri(uniforms(seed, replicate, count, stream))


def normal_matrix(seed, replicates, count, stream=0):
    """Stack of normal vectors, one row per replicate index."""
    replicates = np.asarray(replicates, dtype=np.int64)
    out = np.empty((replicates.size, count))
    for row, rep in enumerate(replicates):
        out[row] = standard_normals(seed, int(rep), count, stream)
    return out
