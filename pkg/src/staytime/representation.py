"""Decayed stay-time weights and the cumulative stay-time vector.

Each observation of a record contributes its stay time (how long the record
remained at that observation before the next one) to the state it occupies,
discounted by how far before the window end it happened.  Summing those
contributions gives a fixed-length vector z whose entries total the decayed
stay time, regardless of how many observations the record has or how unevenly
they are spaced.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigurationError
from .sequences import ObservationSequence
from .states import StateFunction


def softplus(x):
    return np.logaddexp(0.0, x)


def sigmoid(x):
    return np.exp(-softplus(-x))


class DecayParameter:
    """Decay factor in (0, 1], optionally trainable.

    The trainable form stores an unconstrained raw value with
    value = exp(-softplus(raw)), which keeps the factor strictly inside
    (0, 1) during gradient training.  The fixed form stores the value
    directly and admits exactly 1.0 (no decay).
    """

    def __init__(self, value: float = 1.0, trainable: bool = False):
        value = float(value)
        if not np.isfinite(value) or not 0.0 < value <= 1.0:
            raise ConfigurationError(f"decay value must lie in (0, 1], got {value}")
        self.trainable = bool(trainable)
        if self.trainable:
            if value >= 1.0:
                raise ConfigurationError("a trainable decay must start strictly below 1")
            # softplus(raw) = -ln(value)  =>  raw = ln(expm1(-ln(value)))
            self.raw = np.array([np.log(np.expm1(-np.log(value)))])
        else:
            self.raw = None
            self._fixed = value

    @property
    def value(self) -> float:
        if self.trainable:
            return float(np.exp(-softplus(self.raw[0])))
        return self._fixed

    def value_grad(self) -> float:
        """d value / d raw (zero when the parameter is fixed)."""
        if not self.trainable:
            return 0.0
        return float(-self.value * sigmoid(self.raw[0]))

    def snapshot(self) -> float | None:
        return None if self.raw is None else float(self.raw[0])

    def restore(self, raw: float | None):
        if self.trainable:
            self.raw[0] = raw


def decay_exponents(seq: ObservationSequence) -> np.ndarray:
    """Exponent t_M - t_m applied to the decay factor for each observation."""
    t = seq.timestamps
    return t[-1] - t


def stay_times(seq: ObservationSequence, decay: float = 1.0) -> np.ndarray:
    """Decayed stay-time weight of each observation.

    Observation m weighs decay**(t_M - t_m) times its stay time, where the
    stay time is the gap t_m - t_{m-1} with t_0 = 0, or the record's duration
    override when present.  decay = 1 returns the plain stay times.
    """
    decay = float(decay)
    if not np.isfinite(decay) or not 0.0 < decay <= 1.0:
        raise ConfigurationError(f"decay must lie in (0, 1], got {decay}")
    base = seq.gaps()
    if decay == 1.0:
        return base
    return base * decay ** decay_exponents(seq)


def compute_ctr(
    seq: ObservationSequence,
    state: StateFunction,
    decay: float = 1.0,
    normalize: bool = False,
) -> np.ndarray:
    """Cumulative stay-time vector z = sum_m d_m * s(x_m), a length-K array.

    Because every state vector sums to one, sum(z) equals the total decayed
    stay time; normalize divides that total out (off by default).
    """
    d = stay_times(seq, decay)
    z = d @ state.weights_matrix(seq.observations)
    if normalize:
        z = z / d.sum()
    return z


def compute_ctr_batch(sequences, state: StateFunction, decay: float = 1.0,
                      normalize: bool = False) -> np.ndarray:
    """Stack compute_ctr over records into an (N, K) matrix."""
    return np.stack([compute_ctr(s, state, decay, normalize) for s in sequences])
