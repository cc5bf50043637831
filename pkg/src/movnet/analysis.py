"""Monte Carlo campaigns and the statistical checks built on them."""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .consensus import check_assumptions, check_ergodic, run_trial
from .config import trial_seed
from .digraph import transition_matrix
from .exceptions import InsufficientSamples, TrialError
from .markov import loglinear_fit, stationary_distribution
from .neighborhood import (
    arc_uniform_count,
    cumulative_rows,
    ergodic_laplacian,
    pair_indices,
    uniform_positions,
    walk_block,
)

__all__ = [
    "CampaignSummary",
    "DriftReport",
    "TrialResult",
    "contraction_coefficient",
    "fit_decay_rate",
    "run_campaign",
    "empirical_drift",
    "time_average_laplacian",
    "empirical_vs_ergodic",
]

DRIFT_CUTOFF_FACTOR = 10.0


def contraction_coefficient(pi, spec, params):
    """Limit of the per-step drift coefficient: ``2 eps (sum pi^2) (eps*Delta - 1) Delta``."""
    p = np.asarray(getattr(pi, "pi", pi), dtype=float)
    eps, delta = params.epsilon, params.delta
    return 2.0 * eps * float(p @ p) * (eps * delta - 1.0) * delta


def fit_decay_rate(xi, threshold):
    """Per-step geometric rate of ``xi``.

    Fits ``log xi`` against ``t`` where ``10*threshold <= xi <= xi[0]/10``;
    NaN when fewer than two steps fall in that window.
    """
    xi = np.asarray(xi, dtype=float)
    t = np.arange(xi.shape[0])
    window = (xi >= DRIFT_CUTOFF_FACTOR * threshold) & (xi <= xi[0] / 10.0)
    if window.sum() < 2:
        return float("nan")
    slope, _ = loglinear_fit(t[window], xi[window])
    return float(np.exp(slope))


@dataclass
class TrialResult:
    """What a campaign keeps from one trial."""

    index: int
    seed: int
    consensus_time: Optional[int]
    decay_rate: float
    max_conservation_residual: float
    max_abs_x0: float
    final_xi: float
    drift_samples: np.ndarray  # rows (t, xi(t), xi(t+1))


@dataclass
class CampaignSummary:
    trials: int
    consensus_fraction: float
    decay_rate: float
    drift_samples: np.ndarray  # rows (trial, t, xi(t), xi(t+1))
    threshold: float
    contraction_coefficient: float
    results: list = field(default_factory=list)

    @property
    def seeds(self):
        return [r.seed for r in self.results]

    @property
    def max_conservation_residual(self):
        return max(r.max_conservation_residual for r in self.results)

    def to_dict(self):
        return {
            "trials": self.trials,
            "consensus_fraction": self.consensus_fraction,
            "decay_rate": self.decay_rate,
            "threshold": self.threshold,
            "contraction_coefficient": self.contraction_coefficient,
            "drift_sample_count": int(self.drift_samples.shape[0]),
            "max_conservation_residual": self.max_conservation_residual,
            "per_trial": [
                {
                    "index": r.index,
                    "seed": r.seed,
                    "consensus_time": r.consensus_time,
                    "decay_rate": None if np.isnan(r.decay_rate) else r.decay_rate,
                    "max_conservation_residual": r.max_conservation_residual,
                    "final_xi": r.final_xi,
                }
                for r in self.results
            ],
        }


@dataclass
class DriftReport:
    """Empirical one-step drift of the disagreement compared with its predicted limit.

    ``empirical_drift_ratio`` averages ``(xi(t+1) - xi(t)) / xi(t)``; its
    standard error treats each trial as one cluster.
    """

    asymptotic_coefficient: float
    empirical_drift_ratio: float
    standard_error: float
    samples: int
    t_min: int
    t0_estimate: Optional[int]
    margin: float = 3.0
    bins: list = field(default_factory=list)

    @property
    def negative(self):
        return self.empirical_drift_ratio < 0

    @property
    def within_bound(self):
        return self.empirical_drift_ratio <= self.asymptotic_coefficient + self.margin * self.standard_error

    def to_dict(self):
        return {
            "asymptotic_coefficient": self.asymptotic_coefficient,
            "empirical_drift_ratio": self.empirical_drift_ratio,
            "standard_error": self.standard_error,
            "samples": self.samples,
            "t_min": self.t_min,
            "t0_estimate": self.t0_estimate,
            "negative": self.negative,
            "margin_standard_errors": self.margin,
            "within_bound": self.within_bound,
            "bins": self.bins,
        }


def _one_trial(config, index, seed):
    x0, pos0 = config.initial_conditions(seed)
    trace = run_trial(
        config.graph,
        config.linkage,
        config.params(),
        x0,
        pos0,
        config.t_max,
        threshold=config.threshold,
        seed=seed,
        check=not config.skip_assumption_checks,
    )
    xi = trace.xi
    keep = np.flatnonzero(xi[:-1] >= DRIFT_CUTOFF_FACTOR * config.threshold)
    samples = np.column_stack([keep, xi[keep], xi[keep + 1]])
    return TrialResult(
        index=index,
        seed=seed,
        consensus_time=trace.consensus_time,
        decay_rate=fit_decay_rate(xi, config.threshold),
        max_conservation_residual=float(trace.conservation_residual.max()),
        max_abs_x0=float(np.max(np.abs(x0))),
        final_xi=float(xi[-1]),
        drift_samples=samples,
    )


def _guarded_trial(args):
    config, index, seed = args
    try:
        return _one_trial(config, index, seed)
    except Exception as exc:  # noqa: BLE001 - re-raised with the trial index
        return TrialError(index, exc)


def run_campaign(config, trials=None, master_seed=None, jobs=1):
    """Run independent trials and aggregate them.

    Trial ``i`` uses ``trial_seed(master_seed, i)`` for its stream and
    ``initial_rng`` of that seed for generated initial conditions, so any
    single trial can be replayed with :func:`~movnet.consensus.run_trial`.
    Results are merged in trial order whatever ``jobs`` is.
    """
    trials = config.trials if trials is None else int(trials)
    master_seed = config.master_seed if master_seed is None else int(master_seed)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if not config.skip_assumption_checks:
        check_assumptions(config.graph, config.linkage)
    tasks = [(config, i, trial_seed(master_seed, i)) for i in range(trials)]
    if jobs is not None and jobs > 1 and trials > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_guarded_trial, tasks, chunksize=max(1, trials // (4 * jobs))))
    else:
        results = [_guarded_trial(t) for t in tasks]
    errors = [r for r in results if isinstance(r, TrialError)]
    if errors:
        if len(errors) == 1:
            raise errors[0]
        raise TrialError([e.index for e in errors], errors[0].cause)

    Q = transition_matrix(config.graph)
    try:
        coefficient = contraction_coefficient(stationary_distribution(Q), config.linkage, config.params())
    except Exception:  # noqa: BLE001 - non-ergodic runs under an override
        coefficient = float("nan")
    reached = sum(r.consensus_time is not None for r in results)
    rates = np.array([r.decay_rate for r in results])
    samples = [
        np.column_stack([np.full(r.drift_samples.shape[0], r.index), r.drift_samples])
        for r in results
    ]
    return CampaignSummary(
        trials=trials,
        consensus_fraction=reached / trials,
        decay_rate=float(np.nanmedian(rates)) if np.any(np.isfinite(rates)) else float("nan"),
        drift_samples=np.vstack(samples) if samples else np.empty((0, 4)),
        threshold=config.threshold,
        contraction_coefficient=coefficient,
        results=results,
    )


def _cluster_se(values, clusters):
    mean = values.mean()
    _, inverse = np.unique(clusters, return_inverse=True)
    sums = np.bincount(inverse, weights=values - mean)
    g, n = sums.shape[0], values.shape[0]
    if g < 2:
        return float(values.std(ddof=1) / np.sqrt(n)) if n > 1 else float("nan")
    return float(np.sqrt(g / (g - 1) * np.sum(sums**2)) / n)


def empirical_drift(campaign, t_min=50, margin=3.0, bin_width=10, min_bin=30):
    """Estimate ``E[(xi(t+1) - xi(t)) / xi(t)]`` over samples with ``t >= t_min``.

    Samples with ``xi(t) < 10 * threshold`` are dropped: their ratios are
    dominated by rounding. ``t0_estimate`` is the start of the first
    ``bin_width``-step bin after which every bin holding at least ``min_bin``
    samples has a negative mean ratio.

    Raises
    ------
    InsufficientSamples
        Fewer than two usable samples at ``t >= t_min``.
    """
    S = np.asarray(campaign.drift_samples, dtype=float)
    usable = S[S[:, 2] >= DRIFT_CUTOFF_FACTOR * campaign.threshold] if S.size else S
    if usable.size == 0:
        raise InsufficientSamples("no drift samples above the cutoff")
    ratios = (usable[:, 3] - usable[:, 2]) / usable[:, 2]
    late = usable[:, 1] >= t_min
    if late.sum() < 2:
        raise InsufficientSamples(f"only {int(late.sum())} usable samples at t >= {t_min}")

    estimate = float(ratios[late].mean())
    se = _cluster_se(ratios[late], usable[late, 0])

    bin_ids = (usable[:, 1] // bin_width).astype(np.int64)
    bins = []
    for b in np.unique(bin_ids):
        sel = bin_ids == b
        bins.append({"t": int(b * bin_width), "count": int(sel.sum()), "mean_ratio": float(ratios[sel].mean())})
    t0 = None
    for b in reversed([b for b in bins if b["count"] >= min_bin]):
        if b["mean_ratio"] >= 0:
            break
        t0 = b["t"]

    return DriftReport(
        asymptotic_coefficient=campaign.contraction_coefficient,
        empirical_drift_ratio=estimate,
        standard_error=se,
        samples=int(late.sum()),
        t_min=int(t_min),
        t0_estimate=t0,
        margin=margin,
        bins=bins,
    )


def time_average_laplacian(g, spec, t_max, burn_in=0, seed=None, pos0=None, batches=50):
    """Average the sampled Laplacian over steps ``burn_in <= t < t_max`` of one trajectory.

    Returns ``(mean, standard_error)``; the standard error comes from
    ``batches`` equal batch means, which absorbs the autocorrelation of the
    walk. Without ``pos0`` the starting nodes are uniform draws taken first
    from the trajectory's own stream.
    """
    n = spec.n
    t_max, burn_in = int(t_max), int(burn_in)
    if not 0 <= burn_in < t_max:
        raise ValueError("need 0 <= burn_in < t_max")
    rng = np.random.default_rng(seed)
    pos = (uniform_positions(n, g.m, rng) if pos0 is None else np.asarray(pos0)).tolist()
    cum = [row.tolist() for row in cumulative_rows(transition_matrix(g))]
    rows, cols = pair_indices(n, spec.mode)
    prob = spec.P[rows, cols]
    width = n + arc_uniform_count(n, spec.mode)

    span = t_max - burn_in
    batches = max(1, min(int(batches), span))
    edges = burn_in + (np.arange(batches + 1) * span) // batches
    counts = np.zeros((batches, rows.shape[0]))
    t = 0
    while t < t_max:
        size = min(8192, t_max - t)
        U = rng.random((size, width))
        Y = walk_block(pos, cum, U[:, :n])
        present = (Y[:, rows] == Y[:, cols]) & (U[:, n:] < prob)
        steps = np.arange(t, t + size)
        inside = steps >= burn_in
        if inside.any():
            which = np.searchsorted(edges, steps[inside], side="right") - 1
            np.add.at(counts, which, present[inside])
        t += size

    lengths = np.diff(edges).astype(float)
    freq = counts / lengths[:, None]
    L_batches = np.zeros((batches, n, n))
    for q, (i, j) in enumerate(zip(rows, cols)):
        for a, b in ((i, j), (j, i)) if spec.mode == "symmetric" else ((i, j),):
            w = spec.B[a, b] * freq[:, q]
            L_batches[:, a, b] -= w
            L_batches[:, a, a] += w
    mean = np.tensordot(lengths / lengths.sum(), L_batches, axes=1)
    if batches > 1:
        se = L_batches.std(axis=0, ddof=1) / np.sqrt(batches)
    else:
        se = np.full((n, n), np.nan)
    return mean, se


def empirical_vs_ergodic(g, spec, t_max, burn_in=0, seed=None, pos0=None, check=True):
    """Largest entrywise gap between the time-averaged and the ergodic Laplacian."""
    if check:
        check_ergodic(g)
    mean, _ = time_average_laplacian(g, spec, t_max, burn_in, seed, pos0)
    target = ergodic_laplacian(stationary_distribution(transition_matrix(g)), spec)
    return float(np.max(np.abs(mean - target)))
