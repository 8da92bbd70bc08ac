# SPDX-FileCopyrightText: 2026 radiance-edit contributors
# SPDX-License-Identifier: Apache-2.0

"""
Brute-force reference computations used to check the analytic code paths.

Nothing here reuses the numerical kernels it is meant to check: the
posterior mean is estimated by importance sampling from the mixture prior,
gradients by central differences, and distributions by sample moments and
a two-sample Kolmogorov-Smirnov test.
"""

from __future__ import annotations

import dataclasses
import math

from typing import Optional

import numpy as np
import pandas as pd

from scipy import stats

from radiance_edit.oracle.denoiser import check_noise_level, denoise

DEFAULT_K = 3.0
DEFAULT_ABS_TOL = 1e-6
MIN_SAMPLES = 100
MIN_EFFECTIVE_SAMPLES = 10.0


class DegenerateWeightsError(RuntimeError):
    pass


@dataclasses.dataclass
class OracleReport:
    """Monte-Carlo estimate compared against the value under test"""

    name: str
    estimate: np.ndarray
    stderr: np.ndarray
    samples: int
    target: np.ndarray
    k: float = DEFAULT_K
    abs_tol: float = DEFAULT_ABS_TOL
    effective_samples: Optional[float] = None

    @property
    def errors(self):
        return np.abs(np.asarray(self.estimate) - np.asarray(self.target))

    @property
    def passed(self):
        return bool(np.all(self.errors <= self.k * np.asarray(self.stderr) + self.abs_tol))

    def to_record(self):
        errors = self.errors
        stderr = np.asarray(self.stderr)
        with np.errstate(divide="ignore", invalid="ignore"):
            z = np.where(stderr > 0, errors / np.where(stderr > 0, stderr, 1.0), 0.0)
        return {
            "name": self.name,
            "samples": int(self.samples),
            "effective_samples": self.effective_samples,
            "max_abs_error": float(np.max(errors)),
            "max_stderr": float(np.max(stderr)),
            "max_z": float(np.max(z)),
            "k": self.k,
            "abs_tol": self.abs_tol,
            "passed": self.passed,
        }


def reports_to_frame(reports):
    return pd.DataFrame([r.to_record() for r in reports])


def mc_posterior_mean(prompt, view, y, sigma, samples, rng, chunk_size=100_000, k=DEFAULT_K, abs_tol=DEFAULT_ABS_TOL):
    """
    Self-normalised importance estimate of E[x | y] for the prompt's mixture prior
    at noise level ``sigma``, compared against :func:`denoise`.

    Prior draws are streamed in chunks with a running log-sum-exp so large
    sample counts fit in memory.
    """
    if samples < MIN_SAMPLES:
        raise ValueError(f"need at least {MIN_SAMPLES} samples, got {samples}")
    sigma = check_noise_level(sigma)
    targets = prompt.view(view)
    y = np.asarray(y, dtype=np.float64)
    target = denoise(prompt, view, y, sigma)
    if sigma == 0.0:
        return OracleReport("posterior_mean", y.copy(), np.zeros_like(y), 0, target, k, abs_tol)

    means = targets.means.reshape(len(targets.weights), -1)
    y_flat = y.reshape(-1)
    s = prompt.prior_std

    log_max = -math.inf
    sum_w = 0.0
    sum_w2 = 0.0
    sum_wx = np.zeros_like(y_flat)
    sum_w2x = np.zeros_like(y_flat)
    sum_w2x2 = np.zeros_like(y_flat)
    remaining = int(samples)
    while remaining > 0:
        n = min(remaining, int(chunk_size))
        remaining -= n
        comp = rng.choice(len(targets.weights), size=n, p=targets.weights)
        x = means[comp] + s * rng.standard_normal((n, y_flat.size))
        log_w = -0.5 * np.sum((y_flat - x) ** 2, axis=1) / sigma**2

        new_max = max(log_max, float(np.max(log_w)))
        if log_max > -math.inf:
            shrink = math.exp(log_max - new_max)
            sum_w *= shrink
            sum_wx *= shrink
            sum_w2 *= shrink**2
            sum_w2x *= shrink**2
            sum_w2x2 *= shrink**2
        log_max = new_max

        w = np.exp(log_w - log_max)
        w2 = w * w
        sum_w += float(np.sum(w))
        sum_w2 += float(np.sum(w2))
        sum_wx += w @ x
        sum_w2x += w2 @ x
        sum_w2x2 += w2 @ (x * x)

    ess = sum_w**2 / sum_w2
    if ess < MIN_EFFECTIVE_SAMPLES:
        raise DegenerateWeightsError(
            f"only {ess:.1f} effective samples out of {samples} at sigma={sigma}; "
            "use a smaller image or a larger noise level"
        )
    estimate = sum_wx / sum_w
    # delta-method variance of the ratio estimator: sum_i wn_i^2 (x_i - estimate)^2
    var = (sum_w2x2 - 2.0 * estimate * sum_w2x + estimate**2 * sum_w2) / sum_w**2
    stderr = np.sqrt(np.maximum(var, 0.0))
    return OracleReport(
        "posterior_mean",
        estimate.reshape(y.shape),
        stderr.reshape(y.shape),
        int(samples),
        target,
        k,
        abs_tol,
        effective_samples=float(ess),
    )


def _as_vector(params):
    if hasattr(params, "with_flat"):
        return params.flat(), params.with_flat
    array = np.asarray(params, dtype=np.float64)
    return array.reshape(-1).copy(), lambda v: v.reshape(array.shape)


def finite_diff_grad(loss_fn, params, h=1e-4, coords=None):
    """
    Central differences (f(x + h e_i) - f(x - h e_i)) / 2h of ``loss_fn``.

    ``params`` is a FieldParams or a plain array. Only ``coords`` (flat
    indices, default all) are probed; the flat result holds zeros elsewhere.
    """
    if not h > 0:
        raise ValueError(f"step must be positive, got {h}")
    base, rebuild = _as_vector(params)
    coords = range(base.size) if coords is None else coords
    grad = np.zeros_like(base)
    for i in coords:
        plus = base.copy()
        minus = base.copy()
        plus[i] += h
        minus[i] -= h
        grad[i] = (float(loss_fn(rebuild(plus))) - float(loss_fn(rebuild(minus)))) / (2.0 * h)
    return grad


def relative_error(value, reference):
    value = np.asarray(value, dtype=np.float64)
    reference = np.asarray(reference, dtype=np.float64)
    scale = np.linalg.norm(reference)
    return float(np.linalg.norm(value - reference) / (scale if scale > 0 else 1.0))


def _stack(samples):
    return np.stack([s.flat() if hasattr(s, "flat") and callable(s.flat) else np.ravel(s) for s in samples])


def empirical_stats(samples):
    """Per-entry sample mean and unbiased variance"""
    if len(samples) < 2:
        raise ValueError(f"need at least 2 samples, got {len(samples)}")
    stacked = _stack(samples)
    return stacked.mean(axis=0), stacked.var(axis=0, ddof=1)


def tail_fraction(samples, center, std, k):
    """Fraction of entries further than ``k`` standard deviations from ``center``"""
    stacked = _stack(samples) if isinstance(samples, (list, tuple)) else np.asarray(samples, dtype=np.float64)
    return float(np.mean(np.abs(stacked - center) >= k * std))


def ks_same_distribution(a, b, alpha=0.01):
    """Two-sample KS test; returns (not rejected at ``alpha``, p-value)"""
    result = stats.ks_2samp(np.ravel(a), np.ravel(b))
    return bool(result.pvalue >= alpha), float(result.pvalue)
