"""Shared enumeration oracles for the sampler tests.

These deliberately brute-force the posteriors by listing every indicator
configuration, so the samplers are checked against something that cannot
share their bookkeeping bugs.
"""

import itertools

import numpy as np

from bernoulli_detector.core import SegmentPvalues
from bernoulli_detector.gibbs_uni import log_posterior_uni
from bernoulli_detector.gibbs_multi import log_posterior_multi


def enumerate_uni_posterior(x, gamma):
    """All 2^(N-2) interior states with their exact posterior weights."""
    x = np.asarray(x, dtype=float)
    n = x.size
    cache = SegmentPvalues(x)
    states = []
    scores = []
    for interior in itertools.product((0, 1), repeat=n - 2):
        bits = np.array((1, *interior, 1), dtype=np.int8)
        states.append(tuple(int(i) for i in np.nonzero(bits[1:-1])[0] + 1))
        scores.append(log_posterior_uni(bits, x, gamma, cache))
    scores = np.asarray(scores)
    weights = np.exp(scores - scores.max())
    return states, weights / weights.sum(), scores


def enumerate_multi_posterior(values, gamma, configs):
    """All column assignments for a small K-series instance.

    Returns the list of assignments (tuples of configuration indices per
    interior column), their probabilities, and the per-column marginal
    distribution over the configuration set.
    """
    values = np.atleast_2d(np.asarray(values, dtype=float))
    n_series, n = values.shape
    caches = [SegmentPvalues(row) for row in values]
    members = configs.members
    assignments = list(itertools.product(range(configs.size), repeat=n - 2))
    scores = np.empty(len(assignments))
    for idx, assign in enumerate(assignments):
        bits = np.zeros((n_series, n), dtype=np.int8)
        bits[:, 0] = bits[:, -1] = 1
        for col, c in enumerate(assign):
            for j in range(n_series):
                bits[j, col + 1] = members[c][j]
        scores[idx] = log_posterior_multi(bits, values, gamma, configs, caches)
    weights = np.exp(scores - scores.max())
    probs = weights / weights.sum()
    col_marginals = np.zeros((n - 2, configs.size))
    for idx, assign in enumerate(assignments):
        for col, c in enumerate(assign):
            col_marginals[col, c] += probs[idx]
    return assignments, probs, col_marginals
