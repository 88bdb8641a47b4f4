"""Multivariate polynomials in the running couplings.

``CouplingPolynomial`` maps exponent tuples to coefficients from one of
the exact scalar rings (Fraction by default).  Zero coefficients are
never stored, so ``bool(p)`` is the zero test and equality is structural.
These polynomials are themselves valid coefficients for Grassmann
polynomials, which is how the RG step keeps the couplings symbolic.
"""

from __future__ import annotations

from fractions import Fraction


class CouplingPolynomial:
    """Polynomial over exponent tuples of fixed length ``nvars``."""

    __slots__ = ("nvars", "terms", "_float_terms")

    def __init__(self, nvars, terms=None):
        self.nvars = nvars
        self.terms = {}
        self._float_terms = None
        if terms:
            for exps, c in terms.items():
                if len(exps) != nvars:
                    raise ValueError("exponent tuple length mismatch")
                if c:
                    self.terms[tuple(exps)] = c

    # -- constructors -------------------------------------------------

    @classmethod
    def zero(cls, nvars):
        return cls(nvars)

    @classmethod
    def constant(cls, nvars, c):
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def variable(cls, nvars, i, one=Fraction(1)):
        exps = [0] * nvars
        exps[i] = 1
        return cls(nvars, {tuple(exps): one})

    # -- ring operations ----------------------------------------------

    def _check(self, other):
        if other.nvars != self.nvars:
            raise ValueError("mixed variable counts")

    def __add__(self, other):
        if not isinstance(other, CouplingPolynomial):
            return self + CouplingPolynomial.constant(self.nvars, other)
        self._check(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            s = out.get(e, 0) + c
            if s:
                out[e] = s
            else:
                out.pop(e, None)
        return CouplingPolynomial(self.nvars, out)

    __radd__ = __add__

    def __neg__(self):
        return CouplingPolynomial(self.nvars,
                                  {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other if isinstance(other, CouplingPolynomial)
                       else CouplingPolynomial.constant(self.nvars, -other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, CouplingPolynomial):
            # scalar from the coefficient ring, applied on the right
            if not other:
                return CouplingPolynomial(self.nvars)
            return CouplingPolynomial(
                self.nvars, {e: c * other for e, c in self.terms.items()})
        self._check(other)
        out = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                s = out.get(e, 0) + c1 * c2
                if s:
                    out[e] = s
                else:
                    out.pop(e, None)
        return CouplingPolynomial(self.nvars, out)

    def __rmul__(self, other):
        # scalar on the left; coefficient rings may be noncommutative
        if isinstance(other, CouplingPolynomial):
            return NotImplemented
        if not other:
            return CouplingPolynomial(self.nvars)
        return CouplingPolynomial(
            self.nvars, {e: other * c for e, c in self.terms.items()})

    def __truediv__(self, other):
        if isinstance(other, CouplingPolynomial):
            if not other.is_constant():
                raise ZeroDivisionError(
                    "polynomial division only by constants")
            other = other.constant_coefficient()
        return CouplingPolynomial(
            self.nvars, {e: c / other for e, c in self.terms.items()})

    def __pow__(self, n):
        if n < 0:
            raise ValueError("negative power")
        result = CouplingPolynomial.constant(self.nvars, Fraction(1))
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base if n > 1 else base
            n >>= 1
        return result

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if not isinstance(other, CouplingPolynomial):
            if self.is_constant() or not self.terms:
                return self.constant_coefficient() == other
            return NotImplemented
        return self.nvars == other.nvars and self.terms == other.terms

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    # -- structure ----------------------------------------------------

    def is_constant(self):
        return all(not any(e) for e in self.terms)

    def constant_coefficient(self):
        return self.terms.get((0,) * self.nvars, Fraction(0))

    def total_degree(self):
        return max((sum(e) for e in self.terms), default=0)

    def linear_coefficient(self, j):
        exps = [0] * self.nvars
        exps[j] = 1
        return self.terms.get(tuple(exps), Fraction(0))

    def derivative(self, j):
        out = {}
        for e, c in self.terms.items():
            if e[j] == 0:
                continue
            d = list(e)
            d[j] -= 1
            nc = c * e[j]
            if nc:
                out[tuple(d)] = nc
        return CouplingPolynomial(self.nvars, out)

    def map_coefficients(self, fn):
        return CouplingPolynomial(
            self.nvars, {e: fn(c) for e, c in self.terms.items()})

    def term_count(self):
        return len(self.terms)

    def truncate_total_degree(self, max_degree):
        return CouplingPolynomial(
            self.nvars,
            {e: c for e, c in self.terms.items() if sum(e) <= max_degree})

    def inverse_series(self, max_degree):
        """Power-series inverse truncated at total degree ``max_degree``.

        Requires an invertible constant term.
        """
        g = self.constant_coefficient()
        if not g:
            raise ZeroDivisionError("no invertible constant term")
        u = (self - CouplingPolynomial.constant(self.nvars, g)) / g
        acc = CouplingPolynomial.constant(self.nvars, Fraction(1))
        pw = CouplingPolynomial.constant(self.nvars, Fraction(1))
        for _ in range(max_degree):
            pw = (pw * (-u)).truncate_total_degree(max_degree)
            if not pw:
                break
            acc = acc + pw
        return acc / g

    # -- evaluation ----------------------------------------------------

    def evaluate(self, values):
        """Evaluate at a value vector via nested Horner recursion.

        Works for float or Fraction inputs; the arithmetic follows the
        value type, so the exact path stays exact.
        """
        if len(values) != self.nvars:
            raise ValueError("value vector length mismatch")
        items = [(e, c) for e, c in self.terms.items()]
        return _horner(items, 0, self.nvars, values)

    def max_exponents(self):
        """Largest exponent of each variable over all terms."""
        mx = [0] * self.nvars
        for e in self.terms:
            for i, k in enumerate(e):
                if k > mx[i]:
                    mx[i] = k
        return mx

    def evaluate_float(self, powers):
        """Evaluate against a precomputed power table with
        powers[i][k] = values[i]**k; rational coefficients only.

        This is the hot path of grid sampling and flow iteration,
        where rebuilding variable powers per term would dominate.
        """
        compiled = self._float_terms
        if compiled is None:
            # canonical term order keeps evaluation independent of
            # construction history (fresh build vs deserialized)
            compiled = [(float(c),
                         tuple((i, k) for i, k in enumerate(e) if k))
                        for e, c in sorted(self.terms.items())]
            self._float_terms = compiled
        total = 0.0
        for c, nonzero in compiled:
            v = c
            for i, k in nonzero:
                v *= powers[i][k]
            total += v
        return total

    # -- serialization (rational coefficients only) --------------------

    def to_json_obj(self):
        rows = []
        for e in sorted(self.terms):
            c = self.terms[e]
            f = Fraction(c) if not isinstance(c, Fraction) else c
            rows.append([list(e), str(f.numerator), str(f.denominator)])
        return {"nvars": self.nvars, "terms": rows}

    @classmethod
    def from_json_obj(cls, obj):
        terms = {}
        for e, num, den in obj["terms"]:
            terms[tuple(e)] = Fraction(int(num), int(den))
        return cls(obj["nvars"], terms)

    def __repr__(self):
        if not self.terms:
            return "CouplingPolynomial(0)"
        bits = [f"{c}*x^{e}" for e, c in sorted(self.terms.items())]
        return "CouplingPolynomial(" + " + ".join(bits) + ")"


def _horner(items, var, nvars, values):
    """Horner evaluation, recursing one variable at a time."""
    if var == nvars:
        # all exponents consumed; items is [((), c)] or empty
        total = 0
        for _, c in items:
            total = total + c
        return total
    by_power = {}
    for e, c in items:
        by_power.setdefault(e[0], []).append((e[1:], c))
    x = values[var]
    result = 0
    prev = None
    for p in sorted(by_power, reverse=True):
        if prev is not None:
            for _ in range(prev - p):
                result = result * x
        result = result + _horner(by_power[p], var + 1, nvars, values)
        prev = p
    if prev:
        for _ in range(prev):
            result = result * x
    return result
