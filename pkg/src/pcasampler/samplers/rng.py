"""Counter-based uniforms: the draw for (step t, slot i) is a pure function
of ``(seed, stream, t, i, width)``.

Backed by numpy's Philox-4x64 bit generator. Step ``t`` of a chain that
needs ``width`` uniforms per step owns the Philox counter range
``[t*B, (t+1)*B)`` with ``B = ceil(width / 4)`` (four 64-bit words per
counter value). Jumping to any step is therefore O(1), and streaming a
block of consecutive steps from one generator yields exactly the same words
as jumping to each step separately. ``stream`` occupies the upper half of
the 128-bit Philox key, so chains with different streams are independent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.random import Philox

_MASK64 = (1 << 64) - 1
_SCALE = 1.0 / 9007199254740992.0  # 2**-53


@dataclass(frozen=True)
class RngPolicy:
    seed: int
    stream: int = 0

    @property
    def key(self) -> int:
        return (self.seed & _MASK64) | ((self.stream & _MASK64) << 64)

    def substream(self, stream: int) -> "RngPolicy":
        return RngPolicy(self.seed, stream)

    def uniforms(self, step: int, width: int, count: int = 1) -> np.ndarray:
        """Uniforms in (0, 1) for steps ``step .. step+count-1``; shape ``(count, width)``."""
        if step < 0 or count < 0 or width < 1:
            raise ValueError("step and count must be >= 0, width >= 1")
        blocks = -(-width // 4)
        bitgen = Philox(key=self.key, counter=step * blocks)
        raw = bitgen.random_raw(count * blocks * 4).reshape(count, blocks * 4)[:, :width]
        # midpoint of a 2**-53 grid: never exactly 0 or 1
        return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * _SCALE

    def uniform(self, step: int, slot: int, width: int) -> float:
        if not 0 <= slot < width:
            raise ValueError("slot out of range")
        return float(self.uniforms(step, width)[0, slot])
