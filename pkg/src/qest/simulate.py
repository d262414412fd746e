"""Stochastic comparison of plain tomography against adaptive estimation.

One adaptive trial alternates: derive the merit-optimal random measurement
at the current estimate, sample one outcome from the true state, and update
the estimate by constrained maximum likelihood over the recorded history.
Monte Carlo aggregation reports the scaled Bures and squared-error figures
of merit at geometrically spaced checkpoints, next to the theoretical
limits of both schemes.

Everything is deterministic given the seed: trial i draws from an
independent substream derived from (seed, estimator, i), and aggregation
runs in trial order regardless of worker count.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .bounds import (
    RotWeight,
    c_opt_closed,
    c_tomo_closed,
    qcr_min_trace,
    qfi_rot_weight,
    tomography_fisher,
    tomography_weight,
)
from .measurements import Povm, outcome_distribution
from .states import ID2, PAULIS, bures_distance, qubit_qfi, qubit_state

WEIGHT_SELECTORS = ("identity", "qfi", "tomography")
PROB_FLOOR = 1e-12


@dataclass
class RunConfig:
    """Configuration of one Monte Carlo comparison.

    weight is "identity", "qfi", "tomography", or a fixed 3x3 matrix; the
    first three are re-resolved at the running estimate during adaptation.
    """

    x0: np.ndarray
    weight: object = "qfi"
    m_max: int = 3000
    reps: int = 300
    seed: int = 0
    adapt_update_every: int = 1
    mle_restarts: int = 3
    eps_ball: float = 1e-6
    x_init: np.ndarray | None = None
    checkpoints: np.ndarray | None = None

    def __post_init__(self):
        self.x0 = np.asarray(self.x0, dtype=float)
        if self.x0.shape != (3,) or float(self.x0 @ self.x0) >= 1.0:
            raise ValueError("x0 must be a Stokes vector strictly inside the ball")
        if self.m_max < 1 or self.reps < 1:
            raise ValueError("m_max and reps must be at least 1")
        if self.seed < 0:
            raise ValueError("seed must be a nonnegative integer")
        if self.adapt_update_every < 1:
            raise ValueError("adapt_update_every must be positive")
        if isinstance(self.weight, str):
            if self.weight not in WEIGHT_SELECTORS:
                raise ValueError(f"unknown weight selector {self.weight!r}")
        else:
            self.weight = np.asarray(self.weight, dtype=float)
            if self.weight.shape != (3, 3):
                raise ValueError("custom weight must be a 3x3 matrix")
        if self.x_init is not None:
            self.x_init = np.asarray(self.x_init, dtype=float)
        if self.checkpoints is not None:
            self.checkpoints = np.asarray(self.checkpoints, dtype=int)


@dataclass
class TrialRecord:
    """Per-step history of one adaptive run.

    Applied POVM elements are stored in Bloch form: element i is
    (traces[i] * I + bloch[i] . sigma) / 2.
    """

    element_traces: np.ndarray
    element_bloch: np.ndarray
    labels: list
    checkpoints: np.ndarray
    estimates: np.ndarray
    n_opt_failed: int = 0

    def element_matrix(self, i: int) -> np.ndarray:
        op = self.element_traces[i] * ID2.copy()
        for mu in range(3):
            op += self.element_bloch[i, mu] * PAULIS[mu]
        return op / 2


@dataclass
class McSummary:
    """Aggregated figures of merit over repeated runs of one estimator."""

    estimator: str
    checkpoints: np.ndarray
    mean_bures: np.ndarray   # sample mean of 2m * B(tau_x0, tau_xhat)
    se_bures: np.ndarray
    mean_sq: np.ndarray      # sample mean of m * |x0 - xhat|^2
    se_sq: np.ndarray
    c_opt: float
    c_tomo: float
    n_opt_failed: int = 0

    CSV_HEADER = "m,estimator,meanBures,seBures,meanSq,seSq,cOpt,cTomo"

    def to_rows(self) -> list:
        rows = []
        for i, m in enumerate(self.checkpoints):
            rows.append([int(m), self.estimator,
                         float(self.mean_bures[i]), float(self.se_bures[i]),
                         float(self.mean_sq[i]), float(self.se_sq[i]),
                         float(self.c_opt), float(self.c_tomo)])
        return rows

    def to_csv(self) -> str:
        lines = [self.CSV_HEADER]
        for row in self.to_rows():
            lines.append(",".join(repr(v) if isinstance(v, float) else str(v)
                                  for v in row))
        return "\n".join(lines) + "\n"

    def to_json_dict(self) -> dict:
        return {
            "estimator": self.estimator,
            "checkpoints": [int(m) for m in self.checkpoints],
            "meanBures": [float(v) for v in self.mean_bures],
            "seBures": [float(v) for v in self.se_bures],
            "meanSq": [float(v) for v in self.mean_sq],
            "seSq": [float(v) for v in self.se_sq],
            "cOpt": float(self.c_opt),
            "cTomo": float(self.c_tomo),
            "nOptFailed": int(self.n_opt_failed),
        }


def clamp_to_ball(x, eps: float = 1e-6) -> np.ndarray:
    """Radially project onto the closed ball of radius 1 - eps."""
    x = np.asarray(x, dtype=float)
    r = float(np.linalg.norm(x))
    if r <= 1.0 - eps:
        return x
    return x * ((1.0 - eps) / r)


def checkpoint_schedule(m_max: int, per_decade: int = 10) -> np.ndarray:
    """Geometric checkpoint grid, about per_decade points per decade,
    always ending at m_max."""
    points = {m_max}
    j = 0
    while True:
        m = int(round(10 ** (j / per_decade)))
        if m >= m_max:
            break
        points.add(max(m, 1))
        j += 1
    return np.array(sorted(points), dtype=int)


def resolve_weight(selector, x) -> np.ndarray:
    """Weight matrix at the point x for a selector or a fixed matrix."""
    if isinstance(selector, str):
        if selector == "identity":
            return np.eye(3)
        if selector == "qfi":
            return qubit_qfi(x)
        if selector == "tomography":
            return tomography_weight(x)
        raise ValueError(f"unknown weight selector {selector!r}")
    return np.asarray(selector, dtype=float)


def sample_outcome(rho: np.ndarray, povm: Povm, rng: np.random.Generator) -> int:
    """Draw one outcome index by inverse CDF over the label order."""
    probs = outcome_distribution(rho, povm)
    u = rng.random()
    acc = 0.0
    for n, p in enumerate(probs):
        acc += p
        if u < acc:
            return n
    return len(probs) - 1


def run_tomography(x0, m_total: int, rng: np.random.Generator):
    """Plain tomography: m_total draws of the uniform Pauli mixture.

    Counts are drawn multinomially over the six outcomes, equivalent in law
    to i.i.d. single draws.  Returns (estimate, counts) where counts[mu] =
    (minus, plus) for axis mu and estimate[mu] = (plus - minus) / total,
    zero for an axis that was never measured.
    """
    x0 = np.asarray(x0, dtype=float)
    if m_total < 1:
        raise ValueError("m_total must be at least 1")
    probs = np.empty(6)
    for mu in range(3):
        probs[2 * mu] = (1.0 - x0[mu]) / 6.0
        probs[2 * mu + 1] = (1.0 + x0[mu]) / 6.0
    draws = rng.multinomial(m_total, probs)
    counts = draws.reshape(3, 2)
    return tomography_estimate(counts), counts


def tomography_estimate(counts: np.ndarray) -> np.ndarray:
    """Per-axis frequency estimator (plus - minus) / total, zero for an
    axis with no draws.  counts[mu] = (minus, plus)."""
    counts = np.asarray(counts)
    per_axis = counts.sum(axis=1)
    est = np.zeros(3)
    nonzero = per_axis > 0
    est[nonzero] = (counts[nonzero, 1] - counts[nonzero, 0]) / per_axis[nonzero]
    return est


def _optimal_branches(x: np.ndarray, h: np.ndarray):
    """Branch probabilities and PVM axes of the merit-optimal random
    measurement at x, in Bloch form.

    Branch i measures the PVM with projectors (I +- axes[i].sigma)/2 and is
    chosen with probability probs[i].  Axes are the normalized rows of
    U^T sqrt(J); zero-probability branches are dropped.
    """
    r2 = float(x @ x)
    s = np.sqrt(1.0 - r2)
    if r2 > 0.0:
        en = x / np.sqrt(r2)
        proj = np.outer(en, en)
        sqrt_j = np.eye(3) + (1.0 / s - 1.0) * proj
        inv_sqrt_j = np.eye(3) + (s - 1.0) * proj
    else:
        sqrt_j = np.eye(3)
        inv_sqrt_j = np.eye(3)
    core = inv_sqrt_j @ h @ inv_sqrt_j
    scales, basis = np.linalg.eigh((core + core.T) / 2)
    scales = np.sqrt(np.clip(scales, 0.0, None))  # eigenvalues of R
    axes = basis.T @ sqrt_j
    probs = scales / scales.sum()
    keep = probs > 1e-15
    probs = probs[keep]
    probs = probs / probs.sum()
    axes = axes[keep]
    axes = axes / np.linalg.norm(axes, axis=1)[:, None]
    return probs, axes


def _log_likelihood(traces: np.ndarray, bloch: np.ndarray, x: np.ndarray) -> float:
    u = traces + bloch @ x
    return float(np.sum(np.log(np.maximum(u, 2.0 * PROB_FLOOR)))) - len(traces) * np.log(2.0)


def _newton_ascent(traces, bloch, x, eps_ball, max_iter=80):
    """Projected Newton ascent of the (concave) log-likelihood on the ball."""
    x = clamp_to_ball(x, eps_ball)
    u = np.maximum(traces + bloch @ x, 2.0 * PROB_FLOOR)
    lval = float(np.sum(np.log(u)))
    for _ in range(max_iter):
        q = 1.0 / u
        grad = bloch.T @ q
        wq = bloch * q[:, None]
        hess = wq.T @ wq
        hess[np.diag_indices_from(hess)] += 1e-10 * max(1.0, float(np.trace(hess)))
        delta = np.linalg.solve(hess, grad)
        slope = float(grad @ delta)
        if slope <= 1e-14 * (1.0 + abs(lval)):
            # Newton direction exhausted; try plain gradient once
            delta = grad
            slope = float(grad @ grad)
            if slope <= 1e-14 * (1.0 + abs(lval)):
                break
        t = 1.0
        accepted = False
        while t > 1e-12:
            cand = clamp_to_ball(x + t * delta, eps_ball)
            uc = np.maximum(traces + bloch @ cand, 2.0 * PROB_FLOOR)
            lc = float(np.sum(np.log(uc)))
            if lc > lval:
                gain = lc - lval
                x, u, lval = cand, uc, lc
                accepted = True
                break
            t *= 0.5
        if not accepted:
            break
        if gain < 1e-12 * (1.0 + abs(lval)):
            break
    return x, lval - len(traces) * np.log(2.0)


def mle_maximize(traces, bloch, init, *, eps_ball: float = 1e-6,
                 restarts: int = 0, rng: np.random.Generator | None = None):
    """Maximize the history log-likelihood over the clamped ball.

    traces/bloch hold the applied elements in Bloch form; the likelihood of
    x is prod (traces_i + bloch_i . x) / 2, with probabilities floored at
    1e-12 inside the log.  Warm-starts from init; additional random restarts
    guard against line-search stagnation.  Returns (maximizer, ok); ok is
    False only if no start made any progress and the Nelder-Mead fallback
    also failed, in which case init is returned.
    """
    traces = np.asarray(traces, dtype=float)
    bloch = np.asarray(bloch, dtype=float)
    if traces.size == 0:
        raise ValueError("history must be nonempty")
    init = clamp_to_ball(np.asarray(init, dtype=float), eps_ball)
    l_init = _log_likelihood(traces, bloch, init)
    best_x, best_l = _newton_ascent(traces, bloch, init, eps_ball)
    if restarts > 0:
        if rng is None:
            rng = np.random.default_rng(0)
        for _ in range(restarts):
            start = rng.standard_normal(3)
            start *= rng.random() ** (1 / 3) / max(np.linalg.norm(start), 1e-12)
            cand_x, cand_l = _newton_ascent(traces, bloch, start, eps_ball)
            if cand_l > best_l:
                best_x, best_l = cand_x, cand_l
    if best_l >= l_init:
        return best_x, True
    # all starts regressed (should not happen for this concave model);
    # fall back to derivative-free search from init
    from scipy.optimize import minimize

    res = minimize(lambda y: -_log_likelihood(traces, bloch, clamp_to_ball(y, eps_ball)),
                   init, method="Nelder-Mead",
                   options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 2000})
    cand = clamp_to_ball(res.x, eps_ball)
    if _log_likelihood(traces, bloch, cand) >= l_init:
        return cand, True
    return init, False


def adaptive_run(cfg: RunConfig, rng: np.random.Generator) -> TrialRecord:
    """One adaptive trial of cfg.m_max steps.

    At step m the measurement optimal for the weight at the previous
    estimate is applied (re-derived every adapt_update_every steps), one
    outcome is sampled from the true state, and the estimate is updated by
    maximum likelihood warm-started at the previous estimate.
    """
    checkpoints = (cfg.checkpoints if cfg.checkpoints is not None
                   else checkpoint_schedule(cfg.m_max))
    x_true = cfg.x0
    x_hat = (clamp_to_ball(cfg.x_init, cfg.eps_ball)
             if cfg.x_init is not None else np.zeros(3))
    m_max = cfg.m_max
    traces = np.empty(m_max)
    bloch = np.empty((m_max, 3))
    labels = []
    estimates = np.empty((len(checkpoints), 3))
    ckpt_pos = 0
    n_failed = 0
    probs = axes = None
    cum = None
    for m in range(m_max):
        if m % cfg.adapt_update_every == 0 or probs is None:
            h = resolve_weight(cfg.weight, x_hat)
            probs, axes = _optimal_branches(x_hat, h)
            # outcome layout per branch i: (i, -), (i, +)
            half = probs[:, None] * np.stack(
                [(1.0 - axes @ x_true) / 2.0, (1.0 + axes @ x_true) / 2.0], axis=1)
            cum = np.cumsum(half.ravel())
        u = rng.random()
        idx = int(np.searchsorted(cum, u * cum[-1], side="right"))
        idx = min(idx, half.size - 1)
        branch, sign_idx = divmod(idx, 2)
        sign = 1.0 if sign_idx == 1 else -1.0
        traces[m] = probs[branch]
        bloch[m] = sign * probs[branch] * axes[branch]
        labels.append(f"{branch + 1}{'+' if sign > 0 else '-'}")
        restarts = cfg.mle_restarts if (m + 1) % 50 == 0 else 0
        x_hat, ok = mle_maximize(traces[:m + 1], bloch[:m + 1], x_hat,
                                 eps_ball=cfg.eps_ball, restarts=restarts, rng=rng)
        if not ok:
            n_failed += 1
        if ckpt_pos < len(checkpoints) and m + 1 == checkpoints[ckpt_pos]:
            estimates[ckpt_pos] = x_hat
            ckpt_pos += 1
    return TrialRecord(element_traces=traces, element_bloch=bloch, labels=labels,
                       checkpoints=checkpoints, estimates=estimates,
                       n_opt_failed=n_failed)


def _merits(x0: np.ndarray, checkpoints: np.ndarray, estimates: np.ndarray,
            eps_ball: float) -> np.ndarray:
    """Per-checkpoint (2m * Bures, m * squared error) for one trial."""
    rho0 = qubit_state(x0)
    out = np.empty((len(checkpoints), 2))
    for i, m in enumerate(checkpoints):
        est = estimates[i]
        bures = bures_distance(rho0, qubit_state(clamp_to_ball(est, eps_ball)))
        out[i, 0] = 2.0 * m * bures
        out[i, 1] = m * float(np.sum((x0 - est) ** 2))
    return out


def _tomography_trial(cfg: RunConfig, checkpoints: np.ndarray,
                      rng: np.random.Generator) -> np.ndarray:
    probs = np.empty(6)
    for mu in range(3):
        probs[2 * mu] = (1.0 - cfg.x0[mu]) / 6.0
        probs[2 * mu + 1] = (1.0 + cfg.x0[mu]) / 6.0
    counts = np.zeros(6, dtype=np.int64)
    estimates = np.empty((len(checkpoints), 3))
    prev = 0
    for i, m in enumerate(checkpoints):
        counts += rng.multinomial(int(m) - prev, probs)
        prev = int(m)
        estimates[i] = tomography_estimate(counts.reshape(3, 2))
    return _merits(cfg.x0, checkpoints, estimates, cfg.eps_ball)


def _trial_block(cfg: RunConfig, kind: str, checkpoints: np.ndarray,
                 indices) -> tuple:
    merits = np.empty((len(indices), len(checkpoints), 2))
    failed = 0
    for pos, trial in enumerate(indices):
        rng = np.random.default_rng((cfg.seed, _KIND_IDS[kind], int(trial)))
        if kind == "tomography":
            merits[pos] = _tomography_trial(cfg, checkpoints, rng)
        else:
            record = adaptive_run(cfg, rng)
            failed += record.n_opt_failed
            merits[pos] = _merits(cfg.x0, checkpoints, record.estimates, cfg.eps_ball)
    return merits, failed


_KIND_IDS = {"tomography": 0, "adaptive": 1}


def theoretical_merits(cfg: RunConfig) -> tuple[float, float]:
    """(optimal, tomography) asymptotic merit values at the true state.

    Rotationally symmetric selectors use the closed forms; any other weight
    falls back to the generic bound and Tr H g_tomo^-1.
    """
    x0 = cfg.x0
    r = float(np.linalg.norm(x0))
    if isinstance(cfg.weight, str) and cfg.weight == "identity":
        w = RotWeight(1.0, 1.0)
        return c_opt_closed(w, r), c_tomo_closed(w, x0)
    if isinstance(cfg.weight, str) and cfg.weight == "qfi":
        w = qfi_rot_weight(r)
        return c_opt_closed(w, r), c_tomo_closed(w, x0)
    h = resolve_weight(cfg.weight, x0)
    bound = qcr_min_trace(qubit_qfi(x0), h, hilbert_dim=2).bound
    g_tomo = tomography_fisher(x0)
    return bound, float(np.trace(h @ np.linalg.inv(g_tomo)))


def _env_threads() -> int:
    raw = os.environ.get("QEST_THREADS", "")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return min(os.cpu_count() or 1, 8)


def monte_carlo(cfg: RunConfig, estimators=("tomography", "adaptive"),
                threads: int | None = None) -> dict:
    """Repeat both estimation schemes cfg.reps times and aggregate.

    Returns {estimator: McSummary}.  Trials run in parallel worker
    processes when threads > 1; results are identical for any thread count
    because every trial draws from its own (seed, estimator, index)
    substream and reduction follows trial order.
    """
    if threads is None:
        threads = _env_threads()
    checkpoints = (cfg.checkpoints if cfg.checkpoints is not None
                   else checkpoint_schedule(cfg.m_max))
    c_opt, c_tomo = theoretical_merits(cfg)
    out = {}
    for kind in estimators:
        if kind not in _KIND_IDS:
            raise ValueError(f"unknown estimator kind {kind!r}")
        indices = list(range(cfg.reps))
        blocks = []
        if threads > 1 and cfg.reps > 1:
            n_chunks = min(4 * threads, cfg.reps)
            chunks = [indices[i::n_chunks] for i in range(n_chunks)]
            with ProcessPoolExecutor(max_workers=threads) as pool:
                futures = [pool.submit(_trial_block, cfg, kind, checkpoints, chunk)
                           for chunk in chunks]
                results = [f.result() for f in futures]
            merits = np.empty((cfg.reps, len(checkpoints), 2))
            failed = 0
            for chunk, (block, block_failed) in zip(chunks, results):
                merits[chunk] = block
                failed += block_failed
        else:
            merits, failed = _trial_block(cfg, kind, checkpoints, indices)
        mean = merits.mean(axis=0)
        if cfg.reps > 1:
            se = merits.std(axis=0, ddof=1) / np.sqrt(cfg.reps)
        else:
            se = np.zeros_like(mean)
        out[kind] = McSummary(
            estimator=kind, checkpoints=checkpoints,
            mean_bures=mean[:, 0], se_bures=se[:, 0],
            mean_sq=mean[:, 1], se_sq=se[:, 1],
            c_opt=c_opt, c_tomo=c_tomo, n_opt_failed=failed)
    return out
