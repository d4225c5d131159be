"""Polynomial activation bases with analytic first and second derivatives.

The state vector throughout the package is ordered s = (x, y, vx, vy).

Two bases are provided:

* ``"hjb"``: all non-constant terms of (1 + x + vx)^6 + (1 + y + vy)^6,
  54 terms in total.
* ``"fpk"``: all non-constant terms of (1 + x + vx + y + vy)^4,
  69 terms in total.

Term order is canonical graded-lexicographic (total degree first, then
exponent tuple), so weight vectors serialize portably.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial

import numpy as np

STATE_DIM = 4

# indices into the state vector
IX, IY, IVX, IVY = 0, 1, 2, 3


@dataclass(frozen=True)
class Monomial:
    """One basis term: coefficient * x^e0 * y^e1 * vx^e2 * vy^e3."""

    exponents: tuple[int, int, int, int]
    coefficient: float

    def __post_init__(self):
        if sum(self.exponents) < 1:
            raise ValueError("constant terms are excluded from the basis")
        if self.coefficient < 1:
            raise ValueError("multinomial coefficients are >= 1")


def expand_shifted_power(variables: tuple[int, ...], degree: int) -> list[Monomial]:
    """Expand (1 + sum of the given state variables)^degree, dropping the
    constant term.

    ``variables`` are state-vector indices. Returns one Monomial per
    non-constant term with its multinomial coefficient.
    """
    k = len(variables)
    terms = []

    def rec(pos, remaining, exps):
        if pos == k:
            if sum(exps) >= 1:
                const = remaining  # exponent of the "1"
                coeff = factorial(degree)
                for e in exps:
                    coeff //= factorial(e)
                coeff //= factorial(const)
                full = [0] * STATE_DIM
                for var, e in zip(variables, exps):
                    full[var] = e
                terms.append(Monomial(tuple(full), float(coeff)))
            return
        for e in range(remaining + 1):
            rec(pos + 1, remaining - e, exps + [e])

    rec(0, degree, [])
    return terms


def _canonical_sort(terms: list[Monomial]) -> list[Monomial]:
    return sorted(terms, key=lambda m: (sum(m.exponents), m.exponents))


def _merge_duplicates(terms: list[Monomial]) -> list[Monomial]:
    merged: dict[tuple, float] = {}
    for m in terms:
        merged[m.exponents] = merged.get(m.exponents, 0.0) + m.coefficient
    return [Monomial(e, c) for e, c in merged.items()]


class PolynomialBasis:
    """Ordered, immutable collection of monomials over (x, y, vx, vy)."""

    def __init__(self, terms: list[Monomial], kind: str):
        terms = _canonical_sort(_merge_duplicates(terms))
        self.terms = tuple(terms)
        self.kind = kind
        self._E = np.array([m.exponents for m in terms], dtype=np.int64)
        self._C = np.array([m.coefficient for m in terms])
        self._max_exp = int(self._E.max())

    def __len__(self):
        return len(self.terms)

    @property
    def exponents(self) -> np.ndarray:
        return self._E

    @property
    def coefficients(self) -> np.ndarray:
        return self._C

    def _powers(self, s: np.ndarray) -> np.ndarray:
        """Table P[j, p] = s_j ** p for p = 0 .. max exponent + 2."""
        pmax = self._max_exp + 2
        P = np.ones((STATE_DIM, pmax + 1))
        for p in range(1, pmax + 1):
            P[:, p] = P[:, p - 1] * s
        return P

    def features(self, s) -> np.ndarray:
        """Evaluate every term at state vector s. Returns shape (M,)."""
        s = np.asarray(s, dtype=float)
        P = self._powers(s)
        cols = np.arange(STATE_DIM)
        return self._C * P[cols, self._E].prod(axis=1)

    def features_batch(self, S: np.ndarray) -> np.ndarray:
        """Evaluate all terms at each row of S (n, 4). Returns (n, M)."""
        S = np.asarray(S, dtype=float)
        out = np.empty((S.shape[0], len(self.terms)))
        for m, (e, c) in enumerate(zip(self._E, self._C)):
            out[:, m] = c * (S ** e).prod(axis=1)
        return out

    def feature_jacobian(self, s) -> np.ndarray:
        """J[m, j] = d(term m)/d(s_j). Returns shape (M, 4)."""
        s = np.asarray(s, dtype=float)
        P = self._powers(s)
        cols = np.arange(STATE_DIM)
        vals = P[cols, self._E]  # (M, 4): s_j ** e_mj
        J = np.empty((len(self.terms), STATE_DIM))
        for j in range(STATE_DIM):
            e = self._E[:, j]
            dj = e * P[j, np.maximum(e - 1, 0)]
            dj = np.where(e > 0, dj, 0.0)
            others = np.delete(vals, j, axis=1).prod(axis=1)
            J[:, j] = self._C * dj * others
        return J

    def feature_hessians(self, s) -> np.ndarray:
        """H[m, j, k] = d^2(term m)/d(s_j)d(s_k). Returns shape (M, 4, 4)."""
        s = np.asarray(s, dtype=float)
        P = self._powers(s)
        cols = np.arange(STATE_DIM)
        vals = P[cols, self._E]
        M = len(self.terms)
        H = np.zeros((M, STATE_DIM, STATE_DIM))
        for j in range(STATE_DIM):
            ej = self._E[:, j]
            for k in range(j, STATE_DIM):
                ek = self._E[:, k]
                if j == k:
                    fac = ej * (ej - 1)
                    dd = np.where(ej >= 2, fac * P[j, np.maximum(ej - 2, 0)], 0.0)
                    others = np.delete(vals, j, axis=1).prod(axis=1)
                    H[:, j, j] = self._C * dd * others
                else:
                    dj = np.where(ej > 0, ej * P[j, np.maximum(ej - 1, 0)], 0.0)
                    dk = np.where(ek > 0, ek * P[k, np.maximum(ek - 1, 0)], 0.0)
                    rest = np.delete(vals, [j, k], axis=1).prod(axis=1)
                    H[:, j, k] = self._C * dj * dk * rest
                    H[:, k, j] = H[:, j, k]
        return H

    def gradient(self, weights, s) -> np.ndarray:
        """Gradient of w . features(s) with respect to s. Returns (4,)."""
        weights = self._check_weights(weights)
        return self.feature_jacobian(s).T @ weights

    def hessian(self, weights, s) -> np.ndarray:
        """Hessian of w . features(s) with respect to s. Returns (4, 4)."""
        weights = self._check_weights(weights)
        return np.einsum("m,mjk->jk", weights, self.feature_hessians(s))

    def _check_weights(self, weights) -> np.ndarray:
        weights = np.asarray(weights, dtype=float)
        if weights.shape != (len(self.terms),):
            raise ValueError(
                f"weight vector has length {weights.shape}, basis has "
                f"{len(self.terms)} terms"
            )
        return weights


HJB_TERMS = 54
FPK_TERMS = 69


def build_basis(kind: str) -> PolynomialBasis:
    """Build the named basis. ``kind`` is "hjb" or "fpk"."""
    if kind == "hjb":
        terms = expand_shifted_power((IX, IVX), 6) + expand_shifted_power((IY, IVY), 6)
        basis = PolynomialBasis(terms, kind)
        # the two blocks share no variables, so merging must not shrink them
        assert len(basis) == HJB_TERMS
    elif kind == "fpk":
        terms = expand_shifted_power((IX, IVX, IY, IVY), 4)
        basis = PolynomialBasis(terms, kind)
        assert len(basis) == FPK_TERMS
    else:
        raise ValueError(f"unknown basis kind: {kind!r}")
    return basis
