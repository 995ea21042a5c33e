"""Symmetric binary-input edge channels.

Each channel sees the product ``x_e = x_u * x_v`` of its endpoint spins and
emits an observation. Observations are plain Python values: ``+1``/``-1``
for spin outputs, a ``float`` for Gaussian outputs and :data:`ERASED` for an
erasure. Vectorised code uses a float encoding in which ``ERASED`` is ``0.0``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

DEFAULT_QUADRATURE_ORDER = 60


class Erased(enum.Enum):
    ERASED = "*"

    def __repr__(self):
        return "ERASED"


ERASED = Erased.ERASED


class ChannelError(ValueError):
    """Bad channel parameters, spec strings, or observations."""


def _check_spin(x) -> int:
    if x not in (1, -1):
        raise ChannelError(f"edge input must be +1 or -1, got {x!r}")
    return int(x)


def _is_spin(y) -> bool:
    return not isinstance(y, (bool, Erased)) and y in (1, -1) and float(y).is_integer()


class EdgeChannel:
    """Common interface; concrete channels are frozen dataclasses."""

    discrete: bool = True

    def likelihood(self, y, x: int) -> float:
        raise NotImplementedError

    def transform(self, y):
        """The output involution swapping the laws given +1 and -1."""
        raise NotImplementedError

    def sample(self, x: int, rng: np.random.Generator):
        raise NotImplementedError

    def sample_array(self, z: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        """Encoded observations for a vector of edge inputs ``z``."""
        raise NotImplementedError

    def posterior_mean(self, y: np.ndarray) -> np.ndarray:
        """``E[X_e | Y_e = y]`` under a uniform input, on encoded observations."""
        raise NotImplementedError

    def chi2_info(self) -> float:
        raise NotImplementedError

    def outputs(self) -> np.ndarray:
        """Encoded output alphabet (discrete channels only)."""
        raise ChannelError(f"{self} has a continuous output alphabet")

    def mass_table(self) -> np.ndarray:
        """``table[k, i]`` = mass of output ``k`` given input ``(+1, -1)[i]``."""
        ys = self.outputs()
        return np.array(
            [[self.likelihood(decode(y, self), x) for x in (1, -1)] for y in ys],
            dtype=np.float64,
        )


@dataclass(frozen=True)
class BSC(EdgeChannel):
    epsilon: float

    def __post_init__(self):
        if not 0.0 <= self.epsilon <= 1.0:
            raise ChannelError(f"BSC flip probability {self.epsilon} outside [0, 1]")

    @property
    def delta(self) -> float:
        return 1.0 - 2.0 * self.epsilon

    def likelihood(self, y, x):
        x = _check_spin(x)
        if not _is_spin(y):
            raise ChannelError(f"BSC output must be +1 or -1, got {y!r}")
        return 1.0 - self.epsilon if y == x else self.epsilon

    def transform(self, y):
        return -y

    def sample(self, x, rng):
        x = _check_spin(x)
        return -x if rng.random() < self.epsilon else x

    def sample_array(self, z, rng):
        flip = rng.random(z.shape) < self.epsilon
        return np.where(flip, -z, z).astype(np.float64)

    def posterior_mean(self, y):
        return self.delta * y

    def chi2_info(self):
        return self.delta**2

    def outputs(self):
        return np.array([-1.0, 1.0])

    def __str__(self):
        return f"bsc:{self.epsilon:g}"


@dataclass(frozen=True)
class AWGN(EdgeChannel):
    """``Y = sqrt(lam) * x + Z`` with standard normal ``Z``."""

    lam: float
    discrete = False

    def __post_init__(self):
        if not self.lam >= 0.0 or math.isinf(self.lam):
            raise ChannelError(f"AWGN signal-to-noise {self.lam} must be finite and >= 0")

    def likelihood(self, y, x):
        x = _check_spin(x)
        if isinstance(y, (bool, Erased)) or not isinstance(y, (int, float, np.floating, np.integer)):
            raise ChannelError(f"AWGN output must be a real number, got {y!r}")
        r = float(y) - math.sqrt(self.lam) * x
        return math.exp(-0.5 * r * r) / math.sqrt(2.0 * math.pi)

    def transform(self, y):
        return -y

    def sample(self, x, rng):
        x = _check_spin(x)
        return math.sqrt(self.lam) * x + float(rng.standard_normal())

    def sample_array(self, z, rng):
        return math.sqrt(self.lam) * z + rng.standard_normal(z.shape)

    def posterior_mean(self, y):
        return np.tanh(math.sqrt(self.lam) * y)

    def chi2_info(self):
        return awgn_f(self.lam)

    def __str__(self):
        return f"awgn:{self.lam:g}"


@dataclass(frozen=True)
class Erasure(EdgeChannel):
    """Reveals ``x_e`` with probability ``q``, otherwise emits :data:`ERASED`."""

    q: float

    def __post_init__(self):
        if not 0.0 <= self.q <= 1.0:
            raise ChannelError(f"erasure reveal probability {self.q} outside [0, 1]")

    def likelihood(self, y, x):
        x = _check_spin(x)
        if y is ERASED:
            return 1.0 - self.q
        if not _is_spin(y):
            raise ChannelError(f"erasure output must be +1, -1 or ERASED, got {y!r}")
        return self.q if y == x else 0.0

    def transform(self, y):
        return y if y is ERASED else -y

    def sample(self, x, rng):
        x = _check_spin(x)
        return x if rng.random() < self.q else ERASED

    def sample_array(self, z, rng):
        keep = rng.random(z.shape) < self.q
        return np.where(keep, z, 0).astype(np.float64)

    def posterior_mean(self, y):
        return np.asarray(y, dtype=np.float64).copy()

    def chi2_info(self):
        return float(self.q)

    def outputs(self):
        return np.array([-1.0, 0.0, 1.0])

    def __str__(self):
        return f"erasure:{self.q:g}"


def decode(y: float, ch: EdgeChannel):
    """Encoded float -> observation value for ``ch``."""
    if isinstance(ch, AWGN):
        return float(y)
    if isinstance(ch, Erasure) and y == 0.0:
        return ERASED
    return int(y)


def encode(y, ch: EdgeChannel) -> float:
    if y is ERASED:
        if not isinstance(ch, Erasure):
            raise ChannelError(f"{ch} never erases")
        return 0.0
    if ch.discrete and not _is_spin(y):
        raise ChannelError(f"{ch} cannot emit {y!r}")
    if isinstance(y, bool):
        raise ChannelError(f"{ch} cannot emit {y!r}")
    return float(y)


# -- functional surface -------------------------------------------------------


def sample_output(ch: EdgeChannel, x_e: int, rng: np.random.Generator):
    return ch.sample(x_e, rng)


def likelihood(ch: EdgeChannel, y, x_e: int) -> float:
    return ch.likelihood(y, x_e)


def edge_chi2_info(ch: EdgeChannel) -> float:
    """Per-edge chi-squared information ``I_2(X_e; Y_e)``."""
    return ch.chi2_info()


@lru_cache(maxsize=None)
def _hermite_nodes(order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.hermite.hermgauss(order)
    return x * math.sqrt(2.0), w / math.sqrt(math.pi)


def awgn_f(lam: float, order: int = DEFAULT_QUADRATURE_ORDER) -> float:
    """``E[tanh(lam + sqrt(lam) Z)^2]`` by Gauss-Hermite quadrature, clamped to [0, 1]."""
    if order < 2:
        raise ValueError("quadrature order must be at least 2")
    if lam < 0:
        raise ChannelError("lambda must be nonnegative")
    if lam == 0:
        return 0.0
    z, w = _hermite_nodes(order)
    val = float(np.dot(w, np.tanh(lam + math.sqrt(lam) * z) ** 2))
    return min(1.0, max(0.0, val))


def parse_channel(spec: str) -> EdgeChannel:
    """Parse ``bsc:EPS``, ``awgn:LAMBDA`` or ``erasure:Q``."""
    kind, sep, value = spec.strip().partition(":")
    makers = {"bsc": BSC, "awgn": AWGN, "erasure": Erasure}
    if not sep or kind.lower() not in makers:
        raise ChannelError(f"bad channel spec token {spec!r}")
    try:
        param = float(value)
    except ValueError:
        raise ChannelError(f"bad channel spec token {spec!r}: {value!r} is not a number") from None
    try:
        return makers[kind.lower()](param)
    except ChannelError as exc:
        raise ChannelError(f"bad channel spec token {spec!r}: {exc}") from None
