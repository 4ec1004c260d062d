"""Adam-family step rules on flat float64 parameter buffers.

The central rule is the blended update (``adafamily_step``), which squares

    S = c * ((1 - mu) * g_t - mu * m_t),    c = 2 * (1 - |mu - 0.5|)

inside the preconditioner recurrence

    m_t = beta1 * m_{t-1} + (1 - beta1) * g_t
    v_t = beta2 * v_{t-1} + (1 - beta2) * S**2 + eps

so eps accumulates inside v each step and the update divides by sqrt of the
bias-corrected v with no further eps:

    theta_t = theta_{t-1} - lr * m_hat / sqrt(v_hat)

The blend endpoints recover familiar preconditioners: mu=0 squares the raw
gradient, mu=0.5 squares the gradient-minus-momentum residual, and mu=1
squares the momentum itself (identical to ``adamomentum_step``).  The four
baselines keep their original eps placement: Adam/AdamW/AdaBelief divide by
(sqrt(v_hat) + eps), AdaMomentum puts eps inside v like the blended rule.

All step functions mutate the state's m/v buffers in place (the state never
allocates beyond those two vectors) and return a new parameter array.  A
state must be driven by one thread at a time; distinct states are fully
independent.
"""

from __future__ import annotations

import enum
import struct
from dataclasses import dataclass, field, replace

import numpy as np


class Algorithm(enum.Enum):
    ADAFAMILY = "AdaFamily"
    ADAM = "Adam"
    ADAMW = "AdamW"
    ADABELIEF = "AdaBelief"
    ADAMOMENTUM = "AdaMomentum"


class DecayMode(enum.Enum):
    NONE = "none"
    COUPLED = "coupled"
    DECOUPLED = "decoupled"


class BufferMismatchError(ValueError):
    """Parameter, gradient, and state buffers disagree in length."""


class NonFiniteGradientError(ValueError):
    """A gradient entry is NaN or infinite; the message names its index."""


def normalization_factor(mu: float) -> float:
    """Triangle normalization 2*(1 - |mu - 0.5|), keeping the blended
    signal's scale comparable across mu; equals 1 at the endpoints and 2 at
    mu = 0.5."""
    if not 0.0 <= mu <= 1.0:
        raise ValueError(f"mu must lie in [0, 1], got {mu}")
    return 2.0 * (1.0 - abs(mu - 0.5))


@dataclass(frozen=True)
class OptimizerConfig:
    """Scalar hyperparameters of one optimizer instance.

    ``mu`` is only meaningful for Algorithm.ADAFAMILY.  Adam may use coupled
    (L2-style) weight decay; every other algorithm decays decoupled, AdamW
    style.  Invalid combinations are rejected at construction.
    """

    algorithm: Algorithm
    mu: float = 0.0
    alpha: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    weight_decay: float = 0.0
    decay_mode: DecayMode = DecayMode.NONE

    def __post_init__(self) -> None:
        if not 0.0 <= self.mu <= 1.0:
            raise ValueError(f"mu must lie in [0, 1], got {self.mu}")
        if self.alpha <= 0.0:
            raise ValueError(f"alpha must be > 0, got {self.alpha}")
        for name in ("beta1", "beta2"):
            b = getattr(self, name)
            if not 0.0 <= b < 1.0:
                raise ValueError(f"{name} must lie in [0, 1), got {b}")
        if self.epsilon <= 0.0:
            raise ValueError(f"epsilon must be > 0, got {self.epsilon}")
        if self.weight_decay < 0.0:
            raise ValueError(f"weight_decay must be >= 0, got {self.weight_decay}")
        if self.weight_decay > 0.0 and self.decay_mode is DecayMode.NONE:
            raise ValueError(
                "weight_decay > 0 needs an explicit decay_mode (coupled or decoupled)"
            )
        if self.algorithm is Algorithm.ADAM:
            if self.decay_mode is DecayMode.DECOUPLED:
                raise ValueError("Adam uses coupled weight decay; pick COUPLED or NONE")
        elif self.decay_mode is DecayMode.COUPLED:
            raise ValueError(
                f"{self.algorithm.value} uses decoupled weight decay; pick DECOUPLED or NONE"
            )

    @property
    def label(self) -> str:
        """Row label for result tables, e.g. 'AdamW' or 'AdaFamily(0.25)'."""
        if self.algorithm is Algorithm.ADAFAMILY:
            return f"AdaFamily({float(self.mu)})"
        return self.algorithm.value

    def to_dict(self) -> dict:
        return {
            "algorithm": self.algorithm.value,
            "mu": self.mu,
            "alpha": self.alpha,
            "beta1": self.beta1,
            "beta2": self.beta2,
            "epsilon": self.epsilon,
            "weight_decay": self.weight_decay,
            "decay_mode": self.decay_mode.value,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "OptimizerConfig":
        d = dict(d)
        d["algorithm"] = Algorithm(d["algorithm"])
        d["decay_mode"] = DecayMode(d.get("decay_mode", "none"))
        return cls(**d)


@dataclass
class OptimizerState:
    """First moment m, preconditioner v, step counter t, cached factor c.

    m and v are the only vector storage any algorithm here needs; both have
    the parameter buffer's length for the lifetime of the state.
    """

    m: np.ndarray
    v: np.ndarray
    t: int = 0
    c: float = 1.0

    @property
    def dim(self) -> int:
        return self.m.shape[0]


def init_state(config: OptimizerConfig, dim: int) -> OptimizerState:
    """Zeroed state for a parameter buffer of length ``dim``."""
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    c = normalization_factor(config.mu) if config.algorithm is Algorithm.ADAFAMILY else 1.0
    return OptimizerState(
        m=np.zeros(dim, dtype=np.float64),
        v=np.zeros(dim, dtype=np.float64),
        t=0,
        c=c,
    )


def reset(state: OptimizerState) -> OptimizerState:
    """Zero m, v, and t in place (c is config-derived and kept)."""
    state.m[:] = 0.0
    state.v[:] = 0.0
    state.t = 0
    return state


def auxiliary_real_count(state: OptimizerState) -> int:
    """Total auxiliary vector storage in 64-bit reals (2d for every algorithm)."""
    return state.m.size + state.v.size


def _check_step_inputs(
    state: OptimizerState, params: np.ndarray, grad: np.ndarray, lr_scale: float
) -> None:
    if params.shape != (state.dim,) or grad.shape != (state.dim,):
        raise BufferMismatchError(
            f"state dim {state.dim}, params shape {params.shape}, grad shape {grad.shape}"
        )
    if not np.all(np.isfinite(grad)):
        idx = int(np.flatnonzero(~np.isfinite(grad))[0])
        raise NonFiniteGradientError(f"non-finite gradient at index {idx} ({float(grad[idx])})")
    if lr_scale <= 0.0:
        raise ValueError(f"lr_scale must be > 0, got {lr_scale}")


def _apply_decoupled_decay(
    new_params: np.ndarray, params: np.ndarray, config: OptimizerConfig, lr_scale: float
) -> np.ndarray:
    # decay shrinks toward zero from the pre-update parameters, fused with the
    # gradient step; the schedule multiplier scales the decay term too
    if config.decay_mode is DecayMode.DECOUPLED and config.weight_decay > 0.0:
        new_params = new_params - (lr_scale * config.alpha * config.weight_decay) * params
    return new_params


def adafamily_step(
    state: OptimizerState,
    params: np.ndarray,
    grad: np.ndarray,
    config: OptimizerConfig,
    lr_scale: float = 1.0,
) -> np.ndarray:
    """One blended update; returns new parameters, mutates state in place.

    The squared signal uses the current step's m (updated on the line
    before v), and eps enters v as a standalone additive term every step,
    so v_t >= eps * (1 - beta2**t) / (1 - beta2) elementwise and the
    sqrt(v_hat) denominator can never vanish.
    """
    _check_step_inputs(state, params, grad, lr_scale)
    b1, b2 = config.beta1, config.beta2
    state.t += 1
    t = state.t
    m, v = state.m, state.v
    m[:] = b1 * m + (1.0 - b1) * grad
    blended = state.c * ((1.0 - config.mu) * grad - config.mu * m)
    v[:] = b2 * v + (1.0 - b2) * np.square(blended) + config.epsilon
    m_hat = m / (1.0 - b1**t)
    v_hat = v / (1.0 - b2**t)
    new_params = params - (lr_scale * config.alpha) * (m_hat / np.sqrt(v_hat))
    return _apply_decoupled_decay(new_params, params, config, lr_scale)


def _adam_core(
    state: OptimizerState,
    params: np.ndarray,
    grad: np.ndarray,
    config: OptimizerConfig,
    lr_scale: float,
    coupled: bool,
) -> np.ndarray:
    b1, b2 = config.beta1, config.beta2
    state.t += 1
    t = state.t
    if coupled and config.weight_decay > 0.0:
        grad = grad + config.weight_decay * params
    m, v = state.m, state.v
    m[:] = b1 * m + (1.0 - b1) * grad
    v[:] = b2 * v + (1.0 - b2) * np.square(grad)
    m_hat = m / (1.0 - b1**t)
    v_hat = v / (1.0 - b2**t)
    return params - (lr_scale * config.alpha) * (m_hat / (np.sqrt(v_hat) + config.epsilon))


def adam_step(
    state: OptimizerState,
    params: np.ndarray,
    grad: np.ndarray,
    config: OptimizerConfig,
    lr_scale: float = 1.0,
) -> np.ndarray:
    """Classic Adam: v squares the raw gradient, eps sits in the denominator.

    Coupled decay adds weight_decay * params to the gradient before the
    moment updates.
    """
    _check_step_inputs(state, params, grad, lr_scale)
    coupled = config.decay_mode is DecayMode.COUPLED
    return _adam_core(state, params, grad, config, lr_scale, coupled)


def adamw_step(
    state: OptimizerState,
    params: np.ndarray,
    grad: np.ndarray,
    config: OptimizerConfig,
    lr_scale: float = 1.0,
) -> np.ndarray:
    """Adam gradient path plus decoupled decay in the same step.

    With weight_decay = 0 the output is bitwise identical to adam_step.
    """
    _check_step_inputs(state, params, grad, lr_scale)
    new_params = _adam_core(state, params, grad, config, lr_scale, coupled=False)
    return _apply_decoupled_decay(new_params, params, config, lr_scale)


def adabelief_step(
    state: OptimizerState,
    params: np.ndarray,
    grad: np.ndarray,
    config: OptimizerConfig,
    lr_scale: float = 1.0,
) -> np.ndarray:
    """v squares the gradient-minus-momentum residual (with +eps in v), and
    the update keeps a denominator eps as in the method's original form."""
    _check_step_inputs(state, params, grad, lr_scale)
    b1, b2 = config.beta1, config.beta2
    state.t += 1
    t = state.t
    m, v = state.m, state.v
    m[:] = b1 * m + (1.0 - b1) * grad
    v[:] = b2 * v + (1.0 - b2) * np.square(grad - m) + config.epsilon
    m_hat = m / (1.0 - b1**t)
    v_hat = v / (1.0 - b2**t)
    new_params = params - (lr_scale * config.alpha) * (m_hat / (np.sqrt(v_hat) + config.epsilon))
    return _apply_decoupled_decay(new_params, params, config, lr_scale)


def adamomentum_step(
    state: OptimizerState,
    params: np.ndarray,
    grad: np.ndarray,
    config: OptimizerConfig,
    lr_scale: float = 1.0,
) -> np.ndarray:
    """v squares the momentum itself, eps lives inside v, no denominator eps."""
    _check_step_inputs(state, params, grad, lr_scale)
    b1, b2 = config.beta1, config.beta2
    state.t += 1
    t = state.t
    m, v = state.m, state.v
    m[:] = b1 * m + (1.0 - b1) * grad
    v[:] = b2 * v + (1.0 - b2) * np.square(m) + config.epsilon
    m_hat = m / (1.0 - b1**t)
    v_hat = v / (1.0 - b2**t)
    new_params = params - (lr_scale * config.alpha) * (m_hat / np.sqrt(v_hat))
    return _apply_decoupled_decay(new_params, params, config, lr_scale)


_STEP_FUNCTIONS = {
    Algorithm.ADAFAMILY: adafamily_step,
    Algorithm.ADAM: adam_step,
    Algorithm.ADAMW: adamw_step,
    Algorithm.ADABELIEF: adabelief_step,
    Algorithm.ADAMOMENTUM: adamomentum_step,
}


def step(
    state: OptimizerState,
    params: np.ndarray,
    grad: np.ndarray,
    config: OptimizerConfig,
    lr_scale: float = 1.0,
) -> np.ndarray:
    """Dispatch one update to the configured algorithm."""
    return _STEP_FUNCTIONS[config.algorithm](state, params, grad, config, lr_scale)


_HEADER = struct.Struct("<qd")  # t, c


def dump_state(state: OptimizerState) -> bytes:
    """Little-endian dump: int64 t, float64 c, then m and v as raw float64."""
    m = np.ascontiguousarray(state.m, dtype="<f8")
    v = np.ascontiguousarray(state.v, dtype="<f8")
    return _HEADER.pack(state.t, state.c) + m.tobytes() + v.tobytes()


def load_state(data: bytes) -> OptimizerState:
    """Inverse of dump_state; the buffer length determines the dimension."""
    body = len(data) - _HEADER.size
    if body < 16 or body % 16 != 0:
        raise ValueError(f"state dump has invalid length {len(data)}")
    t, c = _HEADER.unpack_from(data)
    dim = body // 16
    flat = np.frombuffer(data, dtype="<f8", offset=_HEADER.size).astype(np.float64)
    return OptimizerState(m=flat[:dim].copy(), v=flat[dim:].copy(), t=t, c=c)
