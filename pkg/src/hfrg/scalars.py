"""Exact scalar rings for the symbolic RG engine.

Three layers, each exact over arbitrary-precision rationals:

* ``GaussianRational``: a + b*i with Fraction components.
* ``RootTwo``: x + y*sqrt(2) with GaussianRational components.  Needed
  because the impurity-model rescaling multiplies fields by 2**(-1/2),
  so intermediate coefficients carry half-integer powers of two.
* ``ImpurityElement``: span{1, S1, S2, S3} over RootTwo, where the S
  matrices multiply like Pauli matrices (S_i S_j = delta_ij + i eps_ijk S_k).

Plain ``int`` and ``fractions.Fraction`` interoperate with all three from
either side, so polynomial code can stay ring-agnostic.
"""

from __future__ import annotations

from fractions import Fraction


def _as_fraction(x):
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    return None


_ZERO_FRACTION = Fraction(0)


class GaussianRational:
    """Exact complex rational a + b*i."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = re if type(re) is Fraction else Fraction(re)
        if type(im) is Fraction:
            self.im = im
        else:
            self.im = _ZERO_FRACTION if im == 0 else Fraction(im)

    @classmethod
    def _lift(cls, x):
        if isinstance(x, cls):
            return x
        f = _as_fraction(x)
        return None if f is None else cls(f)

    def __add__(self, other):
        other = GaussianRational._lift(other)
        if other is None:
            return NotImplemented
        if not self.im and not other.im:
            return GaussianRational(self.re + other.re)
        return GaussianRational(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __sub__(self, other):
        other = GaussianRational._lift(other)
        if other is None:
            return NotImplemented
        return GaussianRational(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        other = GaussianRational._lift(other)
        if other is None:
            return NotImplemented
        return other - self

    def __mul__(self, other):
        other = GaussianRational._lift(other)
        if other is None:
            return NotImplemented
        # purely real factors dominate in practice; skip the cross terms
        if not self.im:
            if not other.im:
                return GaussianRational(self.re * other.re)
            return GaussianRational(self.re * other.re, self.re * other.im)
        if not other.im:
            return GaussianRational(self.re * other.re, self.im * other.re)
        return GaussianRational(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = GaussianRational._lift(other)
        if other is None:
            return NotImplemented
        n = other.re * other.re + other.im * other.im
        if n == 0:
            raise ZeroDivisionError("division by zero GaussianRational")
        return self * GaussianRational(other.re / n, -other.im / n)

    def __rtruediv__(self, other):
        other = GaussianRational._lift(other)
        if other is None:
            return NotImplemented
        return other / self

    def conjugate(self):
        return GaussianRational(self.re, -self.im)

    def __eq__(self, other):
        other = GaussianRational._lift(other)
        if other is None:
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __complex__(self):
        return complex(self.re) + 1j * complex(self.im)

    def __repr__(self):
        return f"GaussianRational({self.re!r}, {self.im!r})"


I_UNIT = GaussianRational(0, 1)
_GR_TWO = GaussianRational(2)


class RootTwo:
    """Exact element x + y*sqrt(2), x and y Gaussian rationals."""

    __slots__ = ("a", "b")

    def __init__(self, a=0, b=0):
        self.a = a if isinstance(a, GaussianRational) else GaussianRational(a)
        self.b = b if isinstance(b, GaussianRational) else GaussianRational(b)

    @classmethod
    def _lift(cls, x):
        if isinstance(x, cls):
            return x
        if isinstance(x, GaussianRational):
            return cls(x)
        f = _as_fraction(x)
        return None if f is None else cls(GaussianRational(f))

    @classmethod
    def half_power_of_two(cls, k):
        """2**(k/2) for integer k, e.g. k=-1 gives sqrt(2)/2."""
        if k % 2 == 0:
            return cls(GaussianRational(Fraction(2) ** (k // 2)))
        return cls(0, GaussianRational(Fraction(2) ** ((k - 1) // 2)))

    def __add__(self, other):
        other = RootTwo._lift(other)
        if other is None:
            return NotImplemented
        return RootTwo(self.a + other.a, self.b + other.b)

    __radd__ = __add__

    def __neg__(self):
        return RootTwo(-self.a, -self.b)

    def __sub__(self, other):
        other = RootTwo._lift(other)
        if other is None:
            return NotImplemented
        return RootTwo(self.a - other.a, self.b - other.b)

    def __rsub__(self, other):
        other = RootTwo._lift(other)
        if other is None:
            return NotImplemented
        return other - self

    def __mul__(self, other):
        other = RootTwo._lift(other)
        if other is None:
            return NotImplemented
        # rational factors dominate in practice; skip the radical terms
        if not self.b:
            if not other.b:
                return RootTwo(self.a * other.a)
            return RootTwo(self.a * other.a, self.a * other.b)
        if not other.b:
            return RootTwo(self.a * other.a, self.b * other.a)
        return RootTwo(
            self.a * other.a + _GR_TWO * (self.b * other.b),
            self.a * other.b + self.b * other.a,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = RootTwo._lift(other)
        if other is None:
            return NotImplemented
        # multiply by the sqrt(2)-conjugate, then divide by the norm a^2 - 2 b^2
        n = other.a * other.a - 2 * (other.b * other.b)
        if not n:
            raise ZeroDivisionError("division by zero RootTwo")
        return RootTwo((self.a * other.a - 2 * (self.b * other.b)) / n,
                       (self.b * other.a - self.a * other.b) / n)

    def __rtruediv__(self, other):
        other = RootTwo._lift(other)
        if other is None:
            return NotImplemented
        return other / self

    def __eq__(self, other):
        other = RootTwo._lift(other)
        if other is None:
            return NotImplemented
        return self.a == other.a and self.b == other.b

    def __hash__(self):
        return hash((self.a, self.b))

    def __bool__(self):
        return bool(self.a) or bool(self.b)

    def is_rational(self):
        return not self.b and not self.a.im

    def rational_part(self):
        return self.a.re

    def __complex__(self):
        return complex(self.a) + complex(self.b) * (2.0 ** 0.5)

    def __repr__(self):
        return f"RootTwo({self.a!r}, {self.b!r})"


_RT_ZERO = RootTwo()
_RT_I = RootTwo(I_UNIT)

# structure constants of S_i S_j = delta_ij * 1 + i * eps_ijk * S_k,
# indexed 1..3; entry (i, j) -> (k, eps) for i != j
_EPS = {
    (1, 2): (3, 1), (2, 1): (3, -1),
    (2, 3): (1, 1), (3, 2): (1, -1),
    (3, 1): (2, 1), (1, 3): (2, -1),
}


class ImpurityElement:
    """Element c0*1 + c1*S1 + c2*S2 + c3*S3 of the impurity spin algebra."""

    __slots__ = ("c",)

    def __init__(self, c0=0, c1=0, c2=0, c3=0):
        self.c = tuple(x if isinstance(x, RootTwo) else RootTwo._lift(x)
                       for x in (c0, c1, c2, c3))
        if any(x is None for x in self.c):
            raise TypeError("ImpurityElement coordinates must be scalars")

    @classmethod
    def _lift(cls, x):
        if isinstance(x, cls):
            return x
        s = RootTwo._lift(x)
        return None if s is None else cls(s)

    @classmethod
    def one(cls):
        return cls(1)

    @classmethod
    def spin(cls, j):
        """The basis element S_j, j in {1, 2, 3}."""
        coords = [0, 0, 0, 0]
        coords[j] = 1
        return cls(*coords)

    def __add__(self, other):
        other = ImpurityElement._lift(other)
        if other is None:
            return NotImplemented
        return ImpurityElement(*(a + b for a, b in zip(self.c, other.c)))

    __radd__ = __add__

    def __neg__(self):
        return ImpurityElement(*(-a for a in self.c))

    def __sub__(self, other):
        other = ImpurityElement._lift(other)
        if other is None:
            return NotImplemented
        return ImpurityElement(*(a - b for a, b in zip(self.c, other.c)))

    def __rsub__(self, other):
        other = ImpurityElement._lift(other)
        if other is None:
            return NotImplemented
        return other - self

    def __mul__(self, other):
        other = ImpurityElement._lift(other)
        if other is None:
            return NotImplemented
        x, y = self.c, other.c
        out = [_RT_ZERO, _RT_ZERO, _RT_ZERO, _RT_ZERO]
        if x[0]:
            for j in range(4):
                if y[j]:
                    out[j] = x[0] * y[j]
        if y[0]:
            for j in (1, 2, 3):
                if x[j]:
                    out[j] = out[j] + x[j] * y[0]
        for j in (1, 2, 3):
            if not x[j]:
                continue
            for l in (1, 2, 3):
                if not y[l]:
                    continue
                p = x[j] * y[l]
                if j == l:
                    out[0] = out[0] + p
                else:
                    k, eps = _EPS[(j, l)]
                    p = _RT_I * p
                    out[k] = out[k] + (p if eps > 0 else -p)
        return ImpurityElement(*out)

    def __rmul__(self, other):
        other = ImpurityElement._lift(other)
        if other is None:
            return NotImplemented
        return other * self

    def __truediv__(self, other):
        # scalar division only; enough for normalisation by a constant
        s = RootTwo._lift(other)
        if s is None:
            return NotImplemented
        return ImpurityElement(*(a / s for a in self.c))

    def __eq__(self, other):
        other = ImpurityElement._lift(other)
        if other is None:
            return NotImplemented
        return self.c == other.c

    def __hash__(self):
        return hash(self.c)

    def __bool__(self):
        return any(self.c)

    def identity_part(self):
        return self.c[0]

    def spin_part_vanishes(self):
        return not (self.c[1] or self.c[2] or self.c[3])

    def __repr__(self):
        return f"ImpurityElement{self.c!r}"
