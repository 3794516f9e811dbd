"""Seedable 64-bit generator with derived per-realization substreams.

The compiled and pure-Python kernels implement this exact generator so
that ensembles are bit-identical regardless of which kernel runs and of
how realizations are distributed over workers.  The stream for
realization i is a splitmix64 sequence started from
``derive_seed(master_seed, i)``.
"""

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
STREAM_SALT = 0xD1B54A32D192ED03


def mix64(z):
    """splitmix64 output function (finalizer)."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(master_seed, i):
    """Starting state of the substream for realization index i."""
    return mix64((master_seed ^ ((i + 1) * STREAM_SALT)) & MASK64)


class SplitMix64:
    """splitmix64 stream; doubles are uniform on [0, 1)."""

    __slots__ = ("state",)

    def __init__(self, seed):
        self.state = seed & MASK64

    def next_u64(self):
        self.state = (self.state + GOLDEN) & MASK64
        return mix64(self.state)

    def next_double(self):
        return (self.next_u64() >> 11) * 1.1102230246251565e-16  # 2**-53
