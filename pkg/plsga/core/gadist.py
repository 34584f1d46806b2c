"""
The double truncated geometric distribution, law of the net number of genes a mutation
adds (k > 0) or removes (k < 0).

It is the law of G_u - G_{-l}, where G_t is a geometric(p) variable renormalized onto
{0, ..., t}. With q = 1 - p (the mutation probability) the mass function is

    g(k) = p (q^(k - 2 min(0, k)) - q^(2 + k - 2 max(l, k - u)))
           / ((2 - p) (1 - q^(u + 1)) (1 - q^(1 - l)))          for l <= k <= u

which is the usual closed form multiplied through by q^-l, so no negative powers of q
are ever formed.
"""
from __future__ import absolute_import
from dataclasses import dataclass

import numpy as np


class DtGeomParameterError(ValueError):
    pass


@dataclass(frozen=True)
class DtGeomParams:
    """p: success probability in (0, 1]; l <= 0 <= u: truncation points"""
    p: float
    l: int  # noqa: E741
    u: int

    def __post_init__(self):
        if not 0 < self.p <= 1:
            raise DtGeomParameterError("p must be in (0, 1], got {}".format(self.p))
        if int(self.l) != self.l or int(self.u) != self.u:
            raise DtGeomParameterError("Truncation points must be integers")
        if self.l > 0 or self.u < 0:
            raise DtGeomParameterError(
                "Truncation must satisfy l <= 0 <= u, got l={}, u={}".format(self.l, self.u))

    @classmethod
    def for_mutation(cls, mutation_probability, size, min_vars, max_vars):
        """Parameters keeping a subset of `size` genes within [min_vars, max_vars]"""
        return cls(1.0 - mutation_probability, int(min_vars - size), int(max_vars - size))

    @property
    def support(self):
        return np.arange(self.l, self.u + 1)


def _pmf_array(k, params):
    k = np.asarray(k, dtype=float)
    p, l, u = params.p, params.l, params.u
    q = 1.0 - p
    num = q ** (k - 2 * np.minimum(0, k)) - q ** (2 + k - 2 * np.maximum(l, k - u))
    den = (2 - p) * (1 - q ** (u + 1)) * (1 - q ** (1 - l))
    g = p * num / den
    return np.where((k >= l) & (k <= u), np.maximum(g, 0.0), 0.0)


def dtgeom_pmf(k, params: DtGeomParams):
    """g(k); zero outside [l, u]. Accepts scalars or arrays"""
    g = _pmf_array(k, params)
    return float(g) if g.ndim == 0 else g


def dtgeom_sample(params: DtGeomParams, rng, size=None):
    """Draws by inverse CDF over the finite support"""
    if params.l == params.u == 0:
        return 0 if size is None else np.zeros(size, dtype=int)
    support = params.support
    cdf = np.cumsum(_pmf_array(support, params))
    cdf /= cdf[-1]
    draws = np.searchsorted(cdf, rng.random(size), side="right")
    values = support[np.minimum(draws, len(support) - 1)]
    return int(values) if size is None else values.astype(int)
