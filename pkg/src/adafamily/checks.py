"""Self-checks and plain-Python reference step rules.

The ``ref_*_run`` functions re-derive every update with scalar Python
floats and explicit loops, sharing no code with the vectorized module.
They are the oracle side of every dual-route test: the fast path in
:mod:`adafamily.optim` must reproduce their trajectories to within 1e-12
relative.  Two of them (``ref_adam_eps_in_v_run``,
``ref_adabelief_eps_in_v_run``) implement the eps-inside-v counterparts of
Adam and AdaBelief that the blend endpoints mu=0 and mu=0.5 must match;
they intentionally do NOT equal the standard baselines, whose eps sits in
the denominator.

``run_checks`` executes the named invariant checks (the CLI ``check``
subcommand calls it) and reports one line per check.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np

from . import rng
from .optim import (
    Algorithm,
    DecayMode,
    OptimizerConfig,
    auxiliary_real_count,
    init_state,
    normalization_factor,
    step,
)

Vector = Sequence[float]


def _decayed(theta_new: list[float], theta_old: Vector, eta: float, lam: float) -> list[float]:
    if lam <= 0.0:
        return theta_new
    return [tn - eta * lam * to for tn, to in zip(theta_new, theta_old)]


def ref_adafamily_run(
    mu: float,
    grads: Sequence[Vector],
    theta0: Vector,
    alpha: float = 1e-3,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
    weight_decay: float = 0.0,
    lr_scales: Sequence[float] | None = None,
) -> list[list[float]]:
    """Scalar-loop blended rule; returns the parameter vector after each step."""
    d = len(theta0)
    c = 2.0 * (1.0 - abs(mu - 0.5))
    m = [0.0] * d
    v = [0.0] * d
    theta = list(theta0)
    out = []
    for t, g in enumerate(grads, start=1):
        eta = alpha * (lr_scales[t - 1] if lr_scales is not None else 1.0)
        new = [0.0] * d
        for i in range(d):
            m[i] = beta1 * m[i] + (1.0 - beta1) * g[i]
            s = c * ((1.0 - mu) * g[i] - mu * m[i])
            v[i] = beta2 * v[i] + (1.0 - beta2) * s * s + eps
            m_hat = m[i] / (1.0 - beta1**t)
            v_hat = v[i] / (1.0 - beta2**t)
            new[i] = theta[i] - eta * m_hat / math.sqrt(v_hat)
        theta = _decayed(new, theta, eta, weight_decay)
        out.append(list(theta))
    return out


def ref_adam_run(
    grads: Sequence[Vector],
    theta0: Vector,
    alpha: float = 1e-3,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
    weight_decay: float = 0.0,
    coupled: bool = True,
    lr_scales: Sequence[float] | None = None,
) -> list[list[float]]:
    """Scalar-loop Adam with optional coupled (L2-style) decay."""
    d = len(theta0)
    m = [0.0] * d
    v = [0.0] * d
    theta = list(theta0)
    out = []
    for t, g in enumerate(grads, start=1):
        eta = alpha * (lr_scales[t - 1] if lr_scales is not None else 1.0)
        new = [0.0] * d
        for i in range(d):
            gi = g[i] + weight_decay * theta[i] if coupled and weight_decay > 0.0 else g[i]
            m[i] = beta1 * m[i] + (1.0 - beta1) * gi
            v[i] = beta2 * v[i] + (1.0 - beta2) * gi * gi
            m_hat = m[i] / (1.0 - beta1**t)
            v_hat = v[i] / (1.0 - beta2**t)
            new[i] = theta[i] - eta * m_hat / (math.sqrt(v_hat) + eps)
        theta = new
        out.append(list(theta))
    return out


def ref_adamw_run(
    grads: Sequence[Vector],
    theta0: Vector,
    alpha: float = 1e-3,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
    weight_decay: float = 0.0,
    lr_scales: Sequence[float] | None = None,
) -> list[list[float]]:
    """Scalar-loop AdamW: Adam gradient path plus decoupled decay."""
    d = len(theta0)
    m = [0.0] * d
    v = [0.0] * d
    theta = list(theta0)
    out = []
    for t, g in enumerate(grads, start=1):
        eta = alpha * (lr_scales[t - 1] if lr_scales is not None else 1.0)
        new = [0.0] * d
        for i in range(d):
            m[i] = beta1 * m[i] + (1.0 - beta1) * g[i]
            v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i]
            m_hat = m[i] / (1.0 - beta1**t)
            v_hat = v[i] / (1.0 - beta2**t)
            new[i] = theta[i] - eta * m_hat / (math.sqrt(v_hat) + eps)
        theta = _decayed(new, theta, eta, weight_decay)
        out.append(list(theta))
    return out


def ref_adabelief_run(
    grads: Sequence[Vector],
    theta0: Vector,
    alpha: float = 1e-3,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
    weight_decay: float = 0.0,
    lr_scales: Sequence[float] | None = None,
) -> list[list[float]]:
    """Scalar-loop AdaBelief: v squares (g - m), +eps in v AND eps in the
    denominator, per the method's original form."""
    d = len(theta0)
    m = [0.0] * d
    v = [0.0] * d
    theta = list(theta0)
    out = []
    for t, g in enumerate(grads, start=1):
        eta = alpha * (lr_scales[t - 1] if lr_scales is not None else 1.0)
        new = [0.0] * d
        for i in range(d):
            m[i] = beta1 * m[i] + (1.0 - beta1) * g[i]
            r = g[i] - m[i]
            v[i] = beta2 * v[i] + (1.0 - beta2) * r * r + eps
            m_hat = m[i] / (1.0 - beta1**t)
            v_hat = v[i] / (1.0 - beta2**t)
            new[i] = theta[i] - eta * m_hat / (math.sqrt(v_hat) + eps)
        theta = _decayed(new, theta, eta, weight_decay)
        out.append(list(theta))
    return out


def ref_adamomentum_run(
    grads: Sequence[Vector],
    theta0: Vector,
    alpha: float = 1e-3,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
    weight_decay: float = 0.0,
    lr_scales: Sequence[float] | None = None,
) -> list[list[float]]:
    """Scalar-loop AdaMomentum: v squares m, eps inside v, bare sqrt below."""
    d = len(theta0)
    m = [0.0] * d
    v = [0.0] * d
    theta = list(theta0)
    out = []
    for t, g in enumerate(grads, start=1):
        eta = alpha * (lr_scales[t - 1] if lr_scales is not None else 1.0)
        new = [0.0] * d
        for i in range(d):
            m[i] = beta1 * m[i] + (1.0 - beta1) * g[i]
            v[i] = beta2 * v[i] + (1.0 - beta2) * m[i] * m[i] + eps
            m_hat = m[i] / (1.0 - beta1**t)
            v_hat = v[i] / (1.0 - beta2**t)
            new[i] = theta[i] - eta * m_hat / math.sqrt(v_hat)
        theta = _decayed(new, theta, eta, weight_decay)
        out.append(list(theta))
    return out


def ref_adam_eps_in_v_run(
    grads: Sequence[Vector],
    theta0: Vector,
    alpha: float = 1e-3,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> list[list[float]]:
    """Adam variant with +eps inside v and a bare sqrt denominator.

    This is what the blended rule reduces to at mu = 0; it is close to, but
    not the same as, standard Adam.
    """
    d = len(theta0)
    m = [0.0] * d
    v = [0.0] * d
    theta = list(theta0)
    out = []
    for t, g in enumerate(grads, start=1):
        new = [0.0] * d
        for i in range(d):
            m[i] = beta1 * m[i] + (1.0 - beta1) * g[i]
            v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i] + eps
            m_hat = m[i] / (1.0 - beta1**t)
            v_hat = v[i] / (1.0 - beta2**t)
            new[i] = theta[i] - alpha * m_hat / math.sqrt(v_hat)
        theta = new
        out.append(list(theta))
    return out


def ref_adabelief_eps_in_v_run(
    grads: Sequence[Vector],
    theta0: Vector,
    alpha: float = 1e-3,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> list[list[float]]:
    """AdaBelief variant with a bare sqrt denominator (eps only inside v).

    This is what the blended rule reduces to at mu = 0.5.
    """
    d = len(theta0)
    m = [0.0] * d
    v = [0.0] * d
    theta = list(theta0)
    out = []
    for t, g in enumerate(grads, start=1):
        new = [0.0] * d
        for i in range(d):
            m[i] = beta1 * m[i] + (1.0 - beta1) * g[i]
            r = g[i] - m[i]
            v[i] = beta2 * v[i] + (1.0 - beta2) * r * r + eps
            m_hat = m[i] / (1.0 - beta1**t)
            v_hat = v[i] / (1.0 - beta2**t)
            new[i] = theta[i] - alpha * m_hat / math.sqrt(v_hat)
        theta = new
        out.append(list(theta))
    return out


REFERENCE_RUNS: dict[Algorithm, Callable[..., list[list[float]]]] = {
    Algorithm.ADAM: ref_adam_run,
    Algorithm.ADAMW: ref_adamw_run,
    Algorithm.ADABELIEF: ref_adabelief_run,
    Algorithm.ADAMOMENTUM: ref_adamomentum_run,
}


def max_relative_divergence(a: Sequence[Vector], b: Sequence[Vector]) -> float:
    """Largest |a - b| / max(|a|, |b|, 1) over two trajectories.

    The unit floor makes the measure behave like absolute error for
    near-zero coordinates instead of dividing by noise.
    """
    worst = 0.0
    for va, vb in zip(a, b, strict=True):
        for xa, xb in zip(va, vb, strict=True):
            denom = max(abs(xa), abs(xb), 1.0)
            worst = max(worst, abs(xa - xb) / denom)
    return worst


def trajectory(
    config: OptimizerConfig,
    grads: np.ndarray,
    theta0: np.ndarray,
    lr_scales: Sequence[float] | None = None,
) -> list[list[float]]:
    """Drive the vectorized step rule over a gradient sequence."""
    state = init_state(config, theta0.shape[0])
    params = theta0.astype(np.float64).copy()
    out = []
    for t, g in enumerate(grads):
        scale = lr_scales[t] if lr_scales is not None else 1.0
        params = step(state, params, g, config, scale)
        out.append(params.tolist())
    return out


# --------------------------------------------------------------------------
# named invariant checks (CLI `check` subcommand)
# --------------------------------------------------------------------------


def _random_grad_streams(key: int, streams: int, steps: int, dim: int) -> list[np.ndarray]:
    return [
        rng.normals(rng.derive_key(key, s), steps * dim).reshape(steps, dim)
        for s in range(streams)
    ]


def check_normalization_endpoints() -> tuple[bool, str]:
    ok = (
        normalization_factor(0.0) == 1.0
        and normalization_factor(1.0) == 1.0
        and normalization_factor(0.5) == 2.0
        and normalization_factor(0.25) == 1.5
    )
    return ok, "c(0)=c(1)=1, c(0.5)=2, c(0.25)=1.5"


def check_normalization_symmetry() -> tuple[bool, str]:
    mus = rng.uniforms(101, 1000)
    worst = 0.0
    for mu in mus:
        c = normalization_factor(float(mu))
        c_rev = normalization_factor(float(1.0 - mu))
        if not 1.0 <= c <= 2.0:
            return False, f"c({mu}) = {c} outside [1, 2]"
        worst = max(worst, abs(c - c_rev))
    return worst == 0.0, f"max |c(mu) - c(1-mu)| = {worst:g} over 1000 draws"


def _endpoint_divergence(mu: float, oracle: Callable[..., list[list[float]]]) -> float:
    dim, steps = 32, 100
    theta0 = rng.normals(rng.derive_key(11, int(mu * 100)), dim)
    config = OptimizerConfig(algorithm=Algorithm.ADAFAMILY, mu=mu)
    worst = 0.0
    for grads in _random_grad_streams(12, 5, steps, dim):
        fast = trajectory(config, grads, theta0)
        ref = oracle(grads.tolist(), theta0.tolist())
        worst = max(worst, max_relative_divergence(fast, ref))
    return worst


def check_endpoint_adamomentum() -> tuple[bool, str]:
    dim, steps = 32, 100
    theta0 = rng.normals(13, dim)
    af = OptimizerConfig(algorithm=Algorithm.ADAFAMILY, mu=1.0)
    am = OptimizerConfig(algorithm=Algorithm.ADAMOMENTUM)
    worst = 0.0
    for grads in _random_grad_streams(14, 5, steps, dim):
        worst = max(
            worst,
            max_relative_divergence(
                trajectory(af, grads, theta0), trajectory(am, grads, theta0)
            ),
        )
    return worst < 1e-12, f"mu=1.0 vs AdaMomentum divergence {worst:.3e}"


def check_endpoint_adam_eps_in_v() -> tuple[bool, str]:
    worst = _endpoint_divergence(0.0, ref_adam_eps_in_v_run)
    return worst < 1e-12, f"mu=0.0 vs eps-in-v Adam oracle divergence {worst:.3e}"


def check_endpoint_adabelief_eps_in_v() -> tuple[bool, str]:
    worst = _endpoint_divergence(0.5, ref_adabelief_eps_in_v_run)
    return worst < 1e-12, f"mu=0.5 vs eps-in-v AdaBelief oracle divergence {worst:.3e}"


def check_v_lower_bound() -> tuple[bool, str]:
    dim, steps = 8, 1000
    eps, beta2 = 1e-8, 0.999
    worst_margin = np.inf
    for mu in (0.0, 0.25, 0.5, 0.75, 1.0):
        config = OptimizerConfig(algorithm=Algorithm.ADAFAMILY, mu=mu, epsilon=eps, beta2=beta2)
        state = init_state(config, dim)
        params = np.zeros(dim)
        grads = rng.normals(rng.derive_key(15, int(mu * 100)), steps * dim).reshape(steps, dim)
        for g in grads:
            params = step(state, params, g, config)
            bound = eps * (1.0 - beta2**state.t) / (1.0 - beta2) - 1e-15
            margin = float(np.min(state.v) - bound)
            worst_margin = min(worst_margin, margin)
            if margin < 0.0 or np.any(state.v <= 0.0):
                return False, f"v bound violated at t={state.t}, mu={mu}"
    return True, f"v stayed above eps*(1-b2^t)/(1-b2); min margin {worst_margin:.3e}"


def check_determinism() -> tuple[bool, str]:
    dim, steps = 16, 50
    theta0 = rng.normals(16, dim)
    grads = rng.normals(17, steps * dim).reshape(steps, dim)
    for algorithm in Algorithm:
        config = OptimizerConfig(
            algorithm=algorithm,
            mu=0.25,
            weight_decay=1e-4,
            decay_mode=DecayMode.COUPLED if algorithm is Algorithm.ADAM else DecayMode.DECOUPLED,
        )
        a = trajectory(config, grads, theta0)
        b = trajectory(config, grads, theta0)
        if a != b:
            return False, f"replay mismatch for {algorithm.value}"
    return True, "identical replays are bitwise identical for all five algorithms"


def check_state_size() -> tuple[bool, str]:
    dim = 17
    for algorithm in Algorithm:
        config = OptimizerConfig(algorithm=algorithm)
        state = init_state(config, dim)
        if auxiliary_real_count(state) != 2 * dim:
            return False, f"{algorithm.value} uses {auxiliary_real_count(state)} reals"
    return True, f"every algorithm stores exactly 2*d auxiliary reals (d={dim})"


def check_gradients() -> tuple[bool, str]:
    # imported here to keep optimizer checks importable without the rest
    from .problems import default_problems_for_gradcheck, finite_diff_grad, relative_error

    worst = 0.0
    for problem, batches_iter in default_problems_for_gradcheck(draws=20):
        for params, batch in batches_iter:
            _, analytic = problem.loss_grad(params, batch)
            numeric = finite_diff_grad(problem, params, batch)
            worst = max(worst, relative_error(analytic, numeric))
    return worst < 1e-5, f"max analytic vs central-difference error {worst:.3e}"


def check_schedule() -> tuple[bool, str]:
    from .harness import lr_scale_for_epoch, lr_scale_sequence

    schedule = ((2, 0.5), (5, 0.2))
    seq = lr_scale_sequence(schedule, 8)
    expected = [1.0, 1.0, 0.5, 0.5, 0.5, 0.1, 0.1, 0.1]
    closed = [lr_scale_for_epoch(schedule, e) for e in range(8)]
    ok = seq == expected and closed == expected
    return ok, f"realized scales {seq}"


CHECKS: list[tuple[str, Callable[[], tuple[bool, str]]]] = [
    ("normalization-endpoints", check_normalization_endpoints),
    ("normalization-symmetry", check_normalization_symmetry),
    ("endpoint-adamomentum", check_endpoint_adamomentum),
    ("endpoint-adam-eps-in-v", check_endpoint_adam_eps_in_v),
    ("endpoint-adabelief-eps-in-v", check_endpoint_adabelief_eps_in_v),
    ("v-lower-bound", check_v_lower_bound),
    ("determinism", check_determinism),
    ("state-size", check_state_size),
    ("gradients", check_gradients),
    ("schedule", check_schedule),
]


def run_checks(name_filter: str | None = None, out=print) -> bool:
    """Run the named checks (substring filter); True when all pass."""
    selected = [(n, f) for n, f in CHECKS if name_filter is None or name_filter in n]
    if not selected:
        out(f"no check matches filter {name_filter!r}")
        return False
    all_ok = True
    for name, fn in selected:
        ok, detail = fn()
        all_ok &= ok
        out(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    return all_ok
