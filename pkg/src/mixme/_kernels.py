"""Compiled kernels: float32 tanh MLP evaluation and gait-task rollouts.

All jitted code lives in this one module because numba's on-disk cache is
invalidated per source file; a kernel inlined from another file would go
stale when only that file changed.
"""

import math

import numba as nb
import numpy as np

# Rational minimax tanh on [-7.9053, 7.9053] (numerator odd, denominator even).
_TANH_CLAMP = np.float32(7.90531110763549805)
_TANH_MAX = np.float32(1.0) - np.float32(2.0**-24)
_A13 = np.float32(-2.76076847742355e-16)
_A11 = np.float32(2.00018790482477e-13)
_A9 = np.float32(-8.60467152213735e-11)
_A7 = np.float32(5.12229709037114e-08)
_A5 = np.float32(1.48572235717979e-05)
_A3 = np.float32(6.37261928875436e-04)
_A1 = np.float32(4.89352455891786e-03)
_B6 = np.float32(1.19825839466702e-06)
_B4 = np.float32(1.18534705686654e-04)
_B2 = np.float32(2.26843463243900e-03)
_B0 = np.float32(4.89352518554385e-03)

# no reassociation: results must not depend on vector width choices
JIT_OPTIONS = dict(error_model="numpy", fastmath={"nnan", "ninf", "nsz", "contract"}, cache=True)


@nb.njit(inline="always", **JIT_OPTIONS)
def _tanh32(x):
    x = min(max(x, -_TANH_CLAMP), _TANH_CLAMP)
    x2 = x * x
    p = ((((((_A13 * x2 + _A11) * x2 + _A9) * x2 + _A7) * x2 + _A5) * x2 + _A3) * x2 + _A1) * x
    q = ((_B6 * x2 + _B4) * x2 + _B2) * x2 + _B0
    return min(max(p / q, -_TANH_MAX), _TANH_MAX)


@nb.njit(**JIT_OPTIONS)
def _dense_tanh(theta, off, n_in, n_out, x, out):
    b_off = off + n_in * n_out
    for j in range(n_out):
        out[j] = theta[b_off + j]
    for k in range(n_in):
        xk = x[k]
        w = theta[off + k * n_out : off + (k + 1) * n_out]
        for j in range(n_out):
            out[j] += xk * w[j]
    for j in range(n_out):
        out[j] = _tanh32(out[j])
    return b_off + n_out


@nb.njit(**JIT_OPTIONS)
def mlp_forward(theta, dims, x, buf_a, buf_b):
    """Evaluate a tanh MLP; returns a view of one of the scratch buffers.

    ``theta`` is float32 in the flat layout, ``buf_a``/``buf_b`` are float32
    scratch buffers at least ``max(dims)`` long.
    """
    for k in range(dims[0]):
        buf_a[k] = x[k]
    off = 0
    n_layers = dims.shape[0] - 1
    for layer in range(n_layers):
        # ping-pong between the buffers; swapping references defeats vectorisation
        if layer % 2 == 0:
            off = _dense_tanh(theta, off, dims[layer], dims[layer + 1], buf_a, buf_b)
        else:
            off = _dense_tanh(theta, off, dims[layer], dims[layer + 1], buf_b, buf_a)
    if n_layers % 2 == 1:
        return buf_b[: dims[n_layers]]
    return buf_a[: dims[n_layers]]


@nb.njit(**JIT_OPTIONS)
def _wrap(x):
    return x - 2.0 * math.pi * math.floor((x + math.pi) / (2.0 * math.pi))


@nb.njit(**JIT_OPTIONS)
def gait_step(theta, omega, actions, consts, gravity_mult, leg_coef, contact):
    """Advance all legs one Euler step in place; returns ``(v, reward)``."""
    dt = consts[0]
    kappa = consts[1]
    damping = consts[2]
    g = consts[3] * gravity_mult
    v = 0.0
    ctrl = 0.0
    for f in range(theta.shape[0]):
        a = actions[f]
        torque = kappa * leg_coef[f] * a
        w = omega[f] + dt * (torque - damping * omega[f] - g * math.sin(theta[f]))
        th = _wrap(theta[f] + dt * w)
        omega[f] = w
        theta[f] = th
        touching = abs(th) <= consts[4]
        contact[f] = touching
        if touching and w < 0.0:
            v += -w * consts[5]
        ctrl += a * a
    return v, consts[6] + consts[7] * v - consts[8] * ctrl


@nb.njit(**JIT_OPTIONS)
def gait_observe(theta, omega, contact, v, agent, single_agent, out):
    n = theta.shape[0]
    if single_agent:
        for f in range(n):
            out[f] = theta[f]
            out[n + f] = omega[f]
            out[2 * n + f] = 1.0 if contact[f] else 0.0
        out[3 * n] = v
    else:
        left = (agent - 1) % n
        right = (agent + 1) % n
        out[0] = theta[agent]
        out[1] = omega[agent]
        out[2] = 1.0 if contact[agent] else 0.0
        out[3] = theta[left]
        out[4] = theta[right]
        out[5] = omega[left]
        out[6] = omega[right]
        out[7] = v


@nb.njit(**JIT_OPTIONS)
def gait_rollout_batch(
    params, dims, single_agent, episode_length, gamma, consts, patience,
    gravity_mult, leg_coef, record, fitness, descriptors, steps, contact_log, reward_log,
):
    n_teams, n_agents, _ = params.shape
    n_legs = leg_coef.shape[0]
    width = 0
    for d in dims:
        width = max(width, d)
    buf_a = np.empty(width, np.float32)
    buf_b = np.empty(width, np.float32)
    obs = np.empty(dims[0], np.float64)
    act_dim = dims[dims.shape[0] - 1]
    actions = np.empty(n_legs, np.float64)
    theta = np.empty(n_legs, np.float64)
    omega = np.empty(n_legs, np.float64)
    contact = np.empty(n_legs, np.bool_)
    counts = np.empty(n_legs, np.int64)
    for i in range(n_teams):
        theta[:] = 0.0
        omega[:] = 0.0
        counts[:] = 0
        for f in range(n_legs):
            contact[f] = abs(theta[f]) <= consts[4]
        v = 0.0
        total = 0.0
        disc = 1.0
        since = 0
        t = 0
        while t < episode_length:
            for agent in range(n_agents):
                gait_observe(theta, omega, contact, v, agent, single_agent, obs)
                out = mlp_forward(params[i, agent], dims, obs, buf_a, buf_b)
                for j in range(act_dim):
                    actions[agent * act_dim + j] = out[j]
            v, r = gait_step(theta, omega, actions, consts, gravity_mult, leg_coef, contact)
            total += disc * r
            disc *= gamma
            touched = False
            for f in range(n_legs):
                if contact[f]:
                    counts[f] += 1
                    touched = True
            since = 0 if touched else since + 1
            if record:
                for f in range(n_legs):
                    contact_log[i, t, f] = contact[f]
                reward_log[i, t] = r
            t += 1
            if since >= patience:
                break
        fitness[i] = total
        steps[i] = t
        for f in range(n_legs):
            descriptors[i, f] = counts[f] / t


