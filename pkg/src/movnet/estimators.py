"""scikit-learn style front-ends.

``RandomWalkAnalyzer`` learns the walk statistics of a weight matrix and
propagates node distributions. ``ConsensusSimulator`` learns the same from
the underlying graph, then maps rows of initial agent states to the states
reached after ``t_max`` protocol steps.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .analysis import contraction_coefficient
from .config import initial_rng, trial_seed
from .consensus import DEFAULT_THRESHOLD, ProtocolParams, check_ergodic, run_trial
from .digraph import WeightedDigraph, cycle_gcd, is_strongly_connected, transition_matrix
from .markov import slem, stationary_distribution
from .neighborhood import LinkageSpec, ergodic_laplacian, uniform_positions

__all__ = ["RandomWalkAnalyzer", "ConsensusSimulator"]


class RandomWalkAnalyzer(TransformerMixin, BaseEstimator):
    """Fit on a weight matrix ``W`` (shape ``(m, m)``); transform node distributions.

    Parameters
    ----------
    steps : int
        Walk steps applied by :meth:`transform`.
    tol : float
        Stationary-distribution tolerance.
    require_ergodic : bool
        Raise ``AssumptionViolated`` from :meth:`fit` when the walk is not
        irreducible and aperiodic.

    Attributes
    ----------
    transition_matrix_ : ndarray of shape (m, m)
    strongly_connected_ : bool
    period_ : int or None
    stationary_distribution_ : ndarray of shape (m,)
    slem_ : float
    """

    def __init__(self, steps=1, tol=1e-10, require_ergodic=True):
        self.steps = steps
        self.tol = tol
        self.require_ergodic = require_ergodic

    def fit(self, X, y=None):
        W = check_array(X, dtype=float)
        self.graph_ = WeightedDigraph(W)
        if self.require_ergodic:
            check_ergodic(self.graph_)
        self.transition_matrix_ = transition_matrix(self.graph_)
        self.strongly_connected_ = is_strongly_connected(self.graph_)
        self.period_ = cycle_gcd(self.graph_) if self.strongly_connected_ else None
        if self.strongly_connected_ and self.period_ == 1:
            sd = stationary_distribution(self.transition_matrix_, tol=self.tol)
            self.stationary_distribution_ = sd.pi
            self.slem_ = slem(self.transition_matrix_)
        else:
            self.stationary_distribution_ = None
            self.slem_ = None
        self.n_features_in_ = W.shape[0]
        return self

    def transform(self, X):
        """Push each row distribution ``steps`` steps along the walk."""
        check_is_fitted(self, "transition_matrix_")
        D = check_array(X, dtype=float)
        if D.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} columns, got {D.shape[1]}")
        return D @ np.linalg.matrix_power(self.transition_matrix_, int(self.steps))


class ConsensusSimulator(TransformerMixin, BaseEstimator):
    """Run the averaging protocol for agents walking on the fitted graph.

    :meth:`fit` takes the underlying weight matrix; :meth:`transform` takes
    initial states, one trial per row, and returns final states. Row ``i``
    uses seed ``trial_seed(random_state, i)``, matching trial ``i`` of a
    campaign with the same master seed.
    """

    def __init__(
        self,
        B=None,
        P=None,
        epsilon=0.1,
        mode="symmetric",
        t_max=20000,
        threshold=DEFAULT_THRESHOLD,
        pos0="uniform",
        random_state=0,
        check_assumptions=True,
        force_epsilon=False,
    ):
        self.B = B
        self.P = P
        self.epsilon = epsilon
        self.mode = mode
        self.t_max = t_max
        self.threshold = threshold
        self.pos0 = pos0
        self.random_state = random_state
        self.check_assumptions = check_assumptions
        self.force_epsilon = force_epsilon

    def fit(self, X, y=None):
        if self.B is None or self.P is None:
            raise ValueError("B and P must be set before fitting")
        self.walk_ = RandomWalkAnalyzer(require_ergodic=self.check_assumptions).fit(X)
        self.graph_ = self.walk_.graph_
        self.linkage_ = LinkageSpec(np.asarray(self.B), np.asarray(self.P), self.mode)
        self.params_ = ProtocolParams.for_spec(self.linkage_, self.epsilon, force=self.force_epsilon)
        self.n_agents_ = self.linkage_.n
        pi = self.walk_.stationary_distribution_
        if pi is not None:
            self.ergodic_laplacian_ = ergodic_laplacian(pi, self.linkage_)
            self.contraction_coefficient_ = (
                contraction_coefficient(pi, self.linkage_, self.params_)
                if self.params_.in_stable_range
                else None
            )
        return self

    def _positions(self, seed):
        if isinstance(self.pos0, str):
            return uniform_positions(self.n_agents_, self.graph_.m, initial_rng(seed))
        return np.asarray(self.pos0, dtype=np.int64)

    def simulate(self, x0, index=0):
        """Full :class:`~movnet.consensus.ConsensusTrace` for one initial state."""
        check_is_fitted(self, "linkage_")
        seed = trial_seed(self.random_state or 0, index)
        return run_trial(
            self.graph_,
            self.linkage_,
            self.params_,
            x0,
            self._positions(seed),
            self.t_max,
            threshold=self.threshold,
            seed=seed,
            check=self.check_assumptions,
        )

    def transform(self, X):
        check_is_fitted(self, "linkage_")
        X0 = check_array(X, dtype=float)
        if X0.shape[1] != self.n_agents_:
            raise ValueError(f"expected {self.n_agents_} columns, got {X0.shape[1]}")
        return np.vstack([self.simulate(x0, i).final_state for i, x0 in enumerate(X0)])

    def score(self, X, y=None):
        """Fraction of rows whose trial reaches the consensus threshold."""
        check_is_fitted(self, "linkage_")
        X0 = check_array(X, dtype=float)
        return float(np.mean([self.simulate(x0, i).reached for i, x0 in enumerate(X0)]))
