"""Analytic functions on the unit disk: Taylor series plus closed forms.

The representation is a truncated Taylor series together with two kinds of
closed-form terms anchored at unimodular points ``zeta0``:

* pole terms      ``gamma / (1 - conj(zeta0) * z)**order``
* log terms       ``beta * log(1 - conj(zeta0) * z)``

Pole terms of order one are the correctors that absorb the classical
compatibility defect of index-one problems; integrating them produces the
log terms.  The series is only trusted up to ``r_max``; evaluation refuses
when the estimated tail at the requested radius exceeds ``tail_tol``.
"""

import json
from dataclasses import dataclass

import numpy as np

from .errors import DataTooWildError, DomainError
from .validation import check_unimodular

R_MAX_DEFAULT = 1.0 - 2.0 ** -14


@dataclass(frozen=True)
class PoleTerm:
    zeta0: complex
    gamma: complex
    order: int = 1

    def __call__(self, z):
        # infinite exactly at the anchor; callers exclude its vicinity
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.gamma / (1.0 - np.conj(self.zeta0) * np.asarray(z)) ** self.order


@dataclass(frozen=True)
class LogTerm:
    zeta0: complex
    beta: complex

    def __call__(self, z):
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.beta * np.log(1.0 - np.conj(self.zeta0) * np.asarray(z))


@dataclass(frozen=True)
class AnalyticRep:
    """Taylor series + closed-form terms, evaluated for ``|z| <= r_max``."""

    coeffs: np.ndarray
    poles: tuple = ()
    logs: tuple = ()
    r_max: float = R_MAX_DEFAULT
    tail_tol: float = 1e-6

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=complex))
        object.__setattr__(self, "coeffs", c)
        for term in tuple(self.poles) + tuple(self.logs):
            check_unimodular(term.zeta0, name="term anchor")
        object.__setattr__(self, "poles", tuple(self.poles))
        object.__setattr__(self, "logs", tuple(self.logs))

    # -- evaluation ---------------------------------------------------------

    def _check_radius(self, z):
        r = np.max(np.abs(z)) if np.size(z) else 0.0
        if r > 1.0 + 1e-12:
            raise DomainError(f"evaluation radius {r:.17g} outside the closed disk")
        k = len(self.coeffs) - 1
        if k >= 8:
            # truncation-error estimate at the requested radius: only
            # meaningful for long (truncated) series, where the magnitude of
            # the last kept coefficient measures the dropped tail; short
            # explicit polynomials are exact and exempt
            tail = abs(self.coeffs[-1]) * min(r, 1.0) ** k
            if tail > self.tail_tol:
                raise DataTooWildError(
                    f"series tail estimate {tail:.3g} exceeds {self.tail_tol:.3g} "
                    f"at radius {r:.6g} (guard radius r_max = {self.r_max:.6g})"
                )
        return np.asarray(z, dtype=complex)

    def __call__(self, z):
        scalar = np.isscalar(z) or np.ndim(z) == 0
        z = self._check_radius(np.atleast_1d(np.asarray(z, dtype=complex)))
        out = np.polynomial.polynomial.polyval(z, self.coeffs)
        for term in self.poles + self.logs:
            out = out + term(z)
        return complex(out[0]) if scalar else out

    def singular_points(self):
        """Boundary anchors of all closed-form terms."""
        return tuple(t.zeta0 for t in self.poles + self.logs)

    # -- calculus -----------------------------------------------------------

    def derivative(self):
        c = self.coeffs
        dc = c[1:] * np.arange(1, len(c)) if len(c) > 1 else np.zeros(1, complex)
        poles = [
            PoleTerm(p.zeta0, p.gamma * p.order * np.conj(p.zeta0), p.order + 1)
            for p in self.poles
        ]
        poles += [PoleTerm(l.zeta0, -l.beta * np.conj(l.zeta0), 1) for l in self.logs]
        return AnalyticRep(dc, tuple(poles), (), self.r_max, self.tail_tol)

    def integrate(self):
        """Indefinite integral with value 0 at the origin.

        Series terms integrate term-wise; order-one poles become log terms
        (``gamma/(1-cz) -> -(gamma/c) log(1-cz)``, ``c = conj(zeta0)``).
        """
        if self.logs:
            raise NotImplementedError("log terms cannot be integrated in closed form")
        c = self.coeffs
        ic = np.zeros(len(c) + 1, dtype=complex)
        ic[1:] = c / np.arange(1, len(c) + 1)
        logs = []
        poles = []
        for p in self.poles:
            cbar = np.conj(p.zeta0)
            if p.order == 1:
                logs.append(LogTerm(p.zeta0, -p.gamma / cbar))
            else:
                poles.append(PoleTerm(p.zeta0, p.gamma / ((p.order - 1) * cbar), p.order - 1))
                # subtract the value at 0 to keep F(0) = 0
                ic[0] -= p.gamma / ((p.order - 1) * cbar)
        return AnalyticRep(ic, tuple(poles), tuple(logs), self.r_max, self.tail_tol)

    # -- linear algebra -----------------------------------------------------

    def __add__(self, other):
        n = max(len(self.coeffs), len(other.coeffs))
        c = np.zeros(n, dtype=complex)
        c[: len(self.coeffs)] += self.coeffs
        c[: len(other.coeffs)] += other.coeffs
        return AnalyticRep(
            c,
            self.poles + other.poles,
            self.logs + other.logs,
            min(self.r_max, other.r_max),
            max(self.tail_tol, other.tail_tol),
        )

    def __sub__(self, other):
        return self + (-1.0) * other

    def __rmul__(self, a):
        a = complex(a)
        return AnalyticRep(
            a * self.coeffs,
            tuple(PoleTerm(p.zeta0, a * p.gamma, p.order) for p in self.poles),
            tuple(LogTerm(l.zeta0, a * l.beta) for l in self.logs),
            self.r_max,
            self.tail_tol,
        )

    # -- serialization ------------------------------------------------------

    def to_json_dict(self):
        d = {
            "coeffs": [[c.real, c.imag] for c in self.coeffs],
            "correctors": [
                {
                    "zeta0": [p.zeta0.real, p.zeta0.imag],
                    "gamma": [p.gamma.real, p.gamma.imag],
                    **({"order": p.order} if p.order != 1 else {}),
                }
                for p in self.poles
            ],
            "r_max": self.r_max,
        }
        if self.logs:
            d["log_terms"] = [
                {"zeta0": [l.zeta0.real, l.zeta0.imag], "beta": [l.beta.real, l.beta.imag]}
                for l in self.logs
            ]
        return d

    def to_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, indent=1, sort_keys=True)
            fh.write("\n")

    @classmethod
    def from_json_dict(cls, d):
        coeffs = np.array([complex(re, im) for re, im in d["coeffs"]], dtype=complex)
        poles = tuple(
            PoleTerm(complex(*p["zeta0"]), complex(*p["gamma"]), int(p.get("order", 1)))
            for p in d.get("correctors", [])
        )
        logs = tuple(
            LogTerm(complex(*l["zeta0"]), complex(*l["beta"]))
            for l in d.get("log_terms", [])
        )
        return cls(coeffs, poles, logs, float(d.get("r_max", R_MAX_DEFAULT)))

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            return cls.from_json_dict(json.load(fh))


def integrate_analytic(f):
    """Indefinite integral of an analytic representation, pinned to 0 at 0."""
    return f.integrate()


def exp_series(w, nterms=None):
    """Taylor coefficients of exp(w(z)) from those of w, by the standard
    recurrence e_n = (1/n) * sum_{k=1}^{n} k w_k e_{n-k}."""
    w = np.asarray(w, dtype=complex)
    n = len(w) if nterms is None else int(nterms)
    e = np.zeros(n, dtype=complex)
    e[0] = np.exp(w[0])
    kw = np.arange(len(w)) * w
    for m in range(1, n):
        kmax = min(m, len(w) - 1)
        e[m] = np.dot(kw[1 : kmax + 1], e[m - 1 :: -1][:kmax]) / m
    return e


def series_product(a, b, nterms):
    """Cauchy product of two coefficient arrays truncated to ``nterms``."""
    out = np.convolve(np.asarray(a, complex), np.asarray(b, complex))
    return out[:nterms] if len(out) >= nterms else np.pad(out, (0, nterms - len(out)))


def divided_difference_series(q, zeta0, nterms):
    """Coefficients of ``(q(z) - q(zeta0)) / (z - zeta0)`` for |zeta0| = 1.

    With q = sum q_k z^k this equals sum_j d_j z^j where
    d_j = sum_{k > j} q_k zeta0^{k-1-j}; computed via reverse cumulative sums.
    """
    q = np.asarray(q, dtype=complex)
    zp = zeta0 ** np.arange(len(q))
    tails = np.cumsum((q * zp)[::-1])[::-1]  # tails[j] = sum_{k >= j} q_k zeta0^k
    j = np.arange(len(q) - 1)
    d = tails[1:] * np.conj(zeta0) ** (j + 1)
    if len(d) >= nterms:
        return d[:nterms]
    return np.pad(d, (0, nterms - len(d)))
