"""Domain types for nested-sum expressions.

Everything here is immutable and hashable.  An :class:`Expression` is a
finite sum of :class:`Monomial` objects; a monomial is a rational
coefficient times a multiset of atoms.  Atom kinds:

* :class:`SSum`            -- nested sum S_{a1..ak}(x1..xk; arg)
* :class:`GplWord`         -- iterated integral H_{m1..mw}(arg)
* :class:`ConstantSymbol`  -- zeta values, log 2, gamma, pi, i*pi, named aux
* :class:`ExpFactor`       -- c^n with c a positive rational != 1
* :class:`AlternatingSign` -- (-1)^n, kept distinct from ExpFactor
* :class:`RationalOfN`     -- P(n) / prod (n+k)^j with integer P
* :class:`MellinKernel`    -- M[H_{m}(x)/(a +- x)](n), kept symbolic
* :class:`DeltaOne`        -- the delta(1-x) bookkeeping token

Coefficients live in Q via :class:`fractions.Fraction`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Union

Rational = Fraction

__all__ = [
    "Rational",
    "SymbolArg",
    "EvenArg",
    "OddArg",
    "FiniteArg",
    "InfinityArg",
    "N",
    "X",
    "INF",
    "SSum",
    "GplWord",
    "ConstantSymbol",
    "ExpFactor",
    "AlternatingSign",
    "ALT",
    "RationalOfN",
    "MellinKernel",
    "MellinAtom",
    "DeltaOne",
    "DELTA",
    "Monomial",
    "Expression",
    "Convergence",
    "convergence_class",
    "canonicalize",
    "atom_key",
    "letter_key",
    "zeta",
    "LOG2",
    "GAMMA",
    "PI",
    "IPI",
    "gpl_min_positive",
    "gpl_series_radius",
    "gpl_is_finite_at",
    "exp_atoms",
    "poly_mul",
    "poly_eval",
    "poly_normalize",
]


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"expected rational, got {type(x).__name__}: {x!r}")


# ---------------------------------------------------------------------------
# sum / polylog arguments
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SymbolArg:
    name: str

    def __repr__(self):
        return self.name


@dataclass(frozen=True)
class EvenArg:
    """The upper limit 2n."""

    def __repr__(self):
        return "2n"


@dataclass(frozen=True)
class OddArg:
    """The upper limit 2n+1."""

    def __repr__(self):
        return "2n+1"


@dataclass(frozen=True)
class FiniteArg:
    value: int

    def __post_init__(self):
        if self.value < 0:
            raise ValueError("finite sum argument must be >= 0")

    def __repr__(self):
        return str(self.value)


@dataclass(frozen=True)
class InfinityArg:
    def __repr__(self):
        return "inf"


N = SymbolArg("n")
X = SymbolArg("x")
INF = InfinityArg()

SumArg = Union[SymbolArg, EvenArg, OddArg, FiniteArg, InfinityArg]


def _arg_key(arg) -> tuple:
    if isinstance(arg, SymbolArg):
        return (0, arg.name)
    if isinstance(arg, EvenArg):
        return (1, "")
    if isinstance(arg, OddArg):
        return (2, "")
    if isinstance(arg, FiniteArg):
        return (3, arg.value)
    if isinstance(arg, InfinityArg):
        return (4, "")
    if isinstance(arg, Fraction):
        return (5, arg)
    raise TypeError(f"not an argument: {arg!r}")


# ---------------------------------------------------------------------------
# convergence of S-sums at infinity
# ---------------------------------------------------------------------------


class Convergence:
    ABSOLUTE = "Absolute"
    CONDITIONAL = "Conditional"
    DIVERGENT = "Divergent"


def _convergence(indices, weights) -> str:
    k = len(indices)
    prods = []
    p = Fraction(1)
    for w in weights:
        p *= w
        prods.append(p)
    # all cumulative products x1..xi small enough
    if abs(weights[0]) < 1 and all(abs(q) <= 1 for q in prods[1:]):
        return Convergence.ABSOLUTE
    tail_ok = all(abs(prods[i] / weights[0]) <= 1 for i in range(1, k))
    if indices[0] > 1 and abs(weights[0]) == 1 and tail_ok:
        return Convergence.ABSOLUTE
    if indices[0] == 1 and weights[0] == -1 and tail_ok:
        return Convergence.CONDITIONAL
    return Convergence.DIVERGENT


# ---------------------------------------------------------------------------
# atoms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SSum:
    indices: tuple
    weights: tuple
    arg: SumArg

    def __init__(self, indices, weights, arg=N):
        indices = tuple(int(a) for a in indices)
        weights = tuple(_frac(x) for x in weights)
        if len(indices) != len(weights) or not indices:
            raise ValueError("indices and weights must have equal positive length")
        if any(a < 1 for a in indices):
            raise ValueError(f"sum exponents must be positive integers: {indices}")
        if any(x == 0 for x in weights):
            raise ValueError("zero weight in S-sum")
        if isinstance(arg, InfinityArg):
            if _convergence(indices, weights) == Convergence.DIVERGENT:
                raise ValueError(
                    f"divergent sum at infinity: S_{list(indices)}({list(weights)})"
                )
        object.__setattr__(self, "indices", indices)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "arg", arg)

    @property
    def depth(self) -> int:
        return len(self.indices)

    @property
    def weight(self) -> int:
        return sum(self.indices)

    def with_arg(self, arg) -> "SSum":
        return SSum(self.indices, self.weights, arg)

    def __repr__(self):
        body = ",".join(map(str, self.indices))
        ws = ",".join(map(str, self.weights))
        return f"S[{body},{{{ws}}},{self.arg!r}]"


def convergence_class(s: SSum) -> str:
    """Classify the n -> infinity behaviour of an S-sum."""
    return _convergence(s.indices, s.weights)


def letter_key(index: int, weight: Fraction) -> tuple:
    """Order on sum letters (a, x): exponent first, then |x|, negative first."""
    return (index, abs(weight), 0 if weight < 0 else 1)


@dataclass(frozen=True)
class GplWord:
    letters: tuple
    arg: Union[SymbolArg, Fraction]

    def __init__(self, letters, arg=X, check=True):
        letters = tuple(_frac(m) for m in letters)
        if not isinstance(arg, SymbolArg):
            arg = _frac(arg)
            if arg < 0:
                raise ValueError("polylog constant arguments must be >= 0")
            if check and letters and not gpl_is_finite_at(letters, arg):
                raise ValueError(
                    f"H_{list(letters)}({arg}) is not finite"
                )
        object.__setattr__(self, "letters", letters)
        object.__setattr__(self, "arg", arg)

    @property
    def weight(self) -> int:
        return len(self.letters)

    def with_arg(self, arg) -> "GplWord":
        return GplWord(self.letters, arg)

    def __repr__(self):
        body = ",".join(map(str, self.letters))
        return f"H[{body},{self.arg!r}]"


def gpl_min_positive(letters) -> Fraction | None:
    pos = [m for m in letters if m > 0]
    return min(pos) if pos else None


def gpl_series_radius(letters) -> Fraction | None:
    nz = [abs(m) for m in letters if m != 0]
    return min(nz) if nz else None


def gpl_is_finite_at(letters, c: Fraction) -> bool:
    """Finiteness of H_{letters}(c) for c >= 0."""
    letters = tuple(_frac(m) for m in letters)
    c = _frac(c)
    if not letters:
        return True
    if c == 0:
        # H(0) = 0 for any word with a nonzero letter; the all-zero word is log^w
        return not all(m == 0 for m in letters)
    q = gpl_min_positive(letters)
    if q is None or c < q:
        return True
    if c == q and letters[0] != q:
        return True
    # trailing-zero pattern (m1..mk,1,0,..,0) extends the range up to q' of the head
    w = len(letters)
    k = w
    while k > 0 and letters[k - 1] == 0:
        k -= 1
    if k >= 1 and k < w and letters[k - 1] == 1:
        head = letters[: k - 1]
        qp = gpl_min_positive(head)
        if (qp is None or c < qp) and c > 0:
            return True
    return False


_CONST_KINDS = ("zeta", "log2", "gamma", "pi", "ipi", "aux")


@dataclass(frozen=True)
class ConstantSymbol:
    kind: str
    data: tuple = ()

    def __post_init__(self):
        if self.kind not in _CONST_KINDS:
            raise ValueError(f"unknown constant kind {self.kind!r}")
        if self.kind == "zeta" and (len(self.data) != 1 or self.data[0] < 2):
            raise ValueError("zeta constants need one integer index >= 2")

    def __repr__(self):
        if self.kind == "zeta":
            return f"z{self.data[0]}"
        if self.kind == "aux":
            return str(self.data[0])
        return {"log2": "log2", "gamma": "gamma", "pi": "pi", "ipi": "I*pi"}[self.kind]


def zeta(k: int) -> ConstantSymbol:
    return ConstantSymbol("zeta", (int(k),))


LOG2 = ConstantSymbol("log2")
GAMMA = ConstantSymbol("gamma")
PI = ConstantSymbol("pi")
IPI = ConstantSymbol("ipi")


@dataclass(frozen=True)
class ExpFactor:
    base: Fraction

    def __init__(self, base):
        base = _frac(base)
        if base <= 0:
            raise ValueError("ExpFactor base must be positive; use AlternatingSign for signs")
        if base == 1:
            raise ValueError("ExpFactor base 1 is the constant 1")
        object.__setattr__(self, "base", base)

    def __repr__(self):
        b = self.base
        return f"{b}^n" if b.denominator == 1 else f"({b})^n"


class AlternatingSign:
    """The distinguished (-1)^n atom."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "(-1)^n"

    def __eq__(self, other):
        return isinstance(other, AlternatingSign)

    def __hash__(self):
        return hash("AlternatingSign")


ALT = AlternatingSign()


class DeltaOne:
    """Bookkeeping token delta(1-x) carrying inverse-Mellin constants."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "delta[1-x]"

    def __eq__(self, other):
        return isinstance(other, DeltaOne)

    def __hash__(self):
        return hash("DeltaOne")


DELTA = DeltaOne()


# -- integer polynomials ----------------------------------------------------


def poly_normalize(coeffs) -> tuple:
    cs = [Fraction(c) for c in coeffs]
    while cs and cs[-1] == 0:
        cs.pop()
    return tuple(cs)


def poly_mul(a, b) -> tuple:
    if not a or not b:
        return ()
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return poly_normalize(out)


def poly_eval(coeffs, v: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(coeffs):
        acc = acc * v + c
    return acc


def _poly_divide_linear(coeffs, k: Fraction):
    """Divide P(n) by (n + k); return quotient or None if not exact."""
    if not coeffs:
        return ()
    q = [Fraction(0)] * (len(coeffs) - 1)
    rem = Fraction(0)
    for c in reversed(range(len(coeffs))):
        cur = coeffs[c] + rem
        if c == 0:
            return poly_normalize(q) if cur == 0 else None
        q[c - 1] = cur
        rem = -k * cur
    return None


@dataclass(frozen=True)
class RationalOfN:
    """P(n) / prod_r (n + k_r)^{j_r}, P primitive integer with positive lead."""

    num: tuple
    den: tuple  # ((k, j), ...) sorted by k, j >= 1, distinct k

    def __init__(self, num, den=()):
        num = poly_normalize(num)
        if not num:
            raise ValueError("RationalOfN numerator is zero; drop the monomial instead")
        den = tuple(sorted(((_frac(k), int(j)) for k, j in den)))
        if any(j < 1 for _, j in den):
            raise ValueError("denominator powers must be >= 1")
        if len({k for k, _ in den}) != len(den):
            raise ValueError("denominator factors must be distinct")
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    @staticmethod
    def make(num, den=()):
        """Normalized constructor: returns (coefficient, RationalOfN or None)."""
        num = poly_normalize(num)
        if not num:
            return Fraction(0), None
        den_map = {}
        for k, j in den:
            k = _frac(k)
            den_map[k] = den_map.get(k, 0) + int(j)
        # cancel exact linear factors
        changed = True
        while changed:
            changed = False
            for k in list(den_map):
                if den_map[k] <= 0 or len(num) < 2:
                    continue
                q = _poly_divide_linear(num, k)
                if q is not None:
                    num = q
                    den_map[k] -= 1
                    if den_map[k] == 0:
                        del den_map[k]
                    changed = True
        # pull content out of the numerator
        denoms = math.lcm(*(c.denominator for c in num)) if num else 1
        ints = [c * denoms for c in num]
        g = 0
        for c in ints:
            g = math.gcd(g, int(c))
        g = g or 1
        sign = 1 if ints[-1] > 0 else -1
        coeff = Fraction(sign * g, denoms)
        num = tuple(c / coeff for c in num)
        den = tuple(sorted(den_map.items()))
        if num == (Fraction(1),) and not den:
            return coeff, None
        return coeff, RationalOfN(num, den)

    def eval(self, n: Fraction) -> Fraction:
        n = _frac(n)
        val = poly_eval(self.num, n)
        for k, j in self.den:
            val /= (n + k) ** j
        return val

    def mul(self, other: "RationalOfN"):
        """Product, renormalized: returns (coefficient, RationalOfN or None)."""
        num = poly_mul(self.num, other.num)
        return RationalOfN.make(num, self.den + other.den)

    def __repr__(self):
        if self.num == (Fraction(1),):
            parts = []
        else:
            parts = [_poly_str(self.num)]
        for k, j in self.den:
            parts.append(f"({_poly_str((k, Fraction(1)))})^-{j}")
        return "*".join(parts) if parts else "1"


def _poly_str(coeffs) -> str:
    terms = []
    for d in reversed(range(len(coeffs))):
        c = coeffs[d]
        if c == 0:
            continue
        if d == 0:
            terms.append(str(c))
        else:
            base = "n" if d == 1 else f"n^{d}"
            if c == 1:
                terms.append(base)
            elif c == -1:
                terms.append(f"-{base}")
            else:
                terms.append(f"{c}*{base}")
    s = terms[0]
    for t in terms[1:]:
        s += t if t.startswith("-") else "+" + t
    if len(terms) > 1 or len(coeffs) > 1:
        return f"({s})" if len(terms) > 1 else s
    return s


# -- Mellin kernels ---------------------------------------------------------


@dataclass(frozen=True)
class MellinKernel:
    """A weighted polylog kernel under the (extended) Mellin transform.

    ``denom`` is None for a bare word, or ("plus", a) for 1/(a+x) with a>0,
    or ("minus", a) for 1/(a-x) with a>0.  For ("minus", a) with a <= 1 the
    transform is the subtracted one: int ((x/a)^n - 1) h(x)/(a-x) dx.
    """

    letters: tuple
    denom: tuple | None = None

    def __init__(self, letters, denom=None):
        letters = tuple(_frac(m) for m in letters)
        if any(0 < m < 1 for m in letters):
            raise ValueError(f"kernel letters must avoid (0,1): {letters}")
        if denom is not None:
            side, a = denom
            a = _frac(a)
            if side not in ("plus", "minus") or a <= 0:
                raise ValueError(f"bad kernel denominator {denom!r}")
            denom = (side, a)
        object.__setattr__(self, "letters", letters)
        object.__setattr__(self, "denom", denom)

    @property
    def subtracted(self) -> bool:
        return self.denom is not None and self.denom[0] == "minus" and self.denom[1] <= 1

    @property
    def weight(self) -> int:
        return len(self.letters)

    def __repr__(self):
        if self.letters:
            word = "H[" + ",".join(map(str, self.letters)) + ",x]"
        else:
            word = "1"
        if self.denom is None:
            return word
        side, a = self.denom
        return f"{word}/({a}+x)" if side == "plus" else f"{word}/({a}-x)"


MellinAtom = MellinKernel  # the kernel doubles as the wrapped M[...](n) atom


# ---------------------------------------------------------------------------
# canonical order
# ---------------------------------------------------------------------------


def _const_key(c: ConstantSymbol) -> tuple:
    order = {"zeta": 0, "log2": 1, "gamma": 2, "pi": 3, "ipi": 4, "aux": 5}
    return (order[c.kind],) + c.data


def atom_key(atom) -> tuple:
    """Total order on atoms; ConstantSymbol < RationalOfN < ExpFactor <
    AlternatingSign < GplWord < SSum < MellinKernel < DeltaOne."""
    if isinstance(atom, ConstantSymbol):
        return (0, _const_key(atom))
    if isinstance(atom, RationalOfN):
        return (1, (atom.den, atom.num))
    if isinstance(atom, ExpFactor):
        return (2, (atom.base,))
    if isinstance(atom, AlternatingSign):
        return (3, ())
    if isinstance(atom, GplWord):
        return (4, (atom.letters, _arg_key(atom.arg)))
    if isinstance(atom, SSum):
        wkey = tuple(letter_key(a, x) for a, x in zip(atom.indices, atom.weights))
        return (5, (atom.weight, atom.depth, atom.indices, wkey, _arg_key(atom.arg)))
    if isinstance(atom, MellinKernel):
        d = atom.denom or ("", Fraction(0))
        return (6, (atom.letters, d))
    if isinstance(atom, DeltaOne):
        return (7, ())
    raise TypeError(f"not an atom: {atom!r}")


# ---------------------------------------------------------------------------
# monomials and expressions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Monomial:
    coeff: Fraction
    atoms: tuple

    def __init__(self, coeff, atoms=()):
        coeff = _frac(coeff)
        cleaned = []
        for a in atoms:
            if isinstance(a, GplWord) and not a.letters:
                continue  # empty word is 1
            cleaned.append(a)
        atoms = tuple(sorted(cleaned, key=atom_key))
        object.__setattr__(self, "coeff", coeff)
        object.__setattr__(self, "atoms", atoms)

    def key(self) -> tuple:
        return tuple(atom_key(a) for a in self.atoms)

    def __repr__(self):
        if not self.atoms:
            return str(self.coeff)
        return f"{self.coeff}*" + "*".join(map(repr, self.atoms))


class Expression:
    """Canonical finite sum of monomials (zero = empty)."""

    __slots__ = ("monomials",)

    def __init__(self, monomials: Iterable[Monomial] = ()):
        merged: dict = {}
        for m in monomials:
            if m.coeff == 0:
                continue
            k = m.key()
            if k in merged:
                merged[k] = Monomial(merged[k].coeff + m.coeff, m.atoms)
            else:
                merged[k] = m
        items = sorted(merged.items(), key=lambda kv: kv[0])
        object.__setattr__(self, "monomials", tuple(m for _, m in items if m.coeff != 0))

    # -- constructors --------------------------------------------------

    @staticmethod
    def zero() -> "Expression":
        return Expression(())

    @staticmethod
    def one() -> "Expression":
        return Expression((Monomial(1),))

    @staticmethod
    def from_coeff(c) -> "Expression":
        return Expression((Monomial(c),))

    @staticmethod
    def from_atom(atom, coeff=1) -> "Expression":
        return Expression((Monomial(coeff, (atom,)),))

    # -- algebra --------------------------------------------------------

    def __add__(self, other) -> "Expression":
        other = _as_expr(other)
        return Expression(self.monomials + other.monomials)

    __radd__ = __add__

    def __neg__(self) -> "Expression":
        return Expression(tuple(Monomial(-m.coeff, m.atoms) for m in self.monomials))

    def __sub__(self, other) -> "Expression":
        return self + (-_as_expr(other))

    def __rsub__(self, other) -> "Expression":
        return _as_expr(other) + (-self)

    def __mul__(self, other) -> "Expression":
        other = _as_expr(other)
        out = []
        for m1 in self.monomials:
            for m2 in other.monomials:
                out.append(_mul_monomials(m1, m2))
        return Expression(out)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Expression":
        if k < 0:
            raise ValueError("negative expression powers are not defined")
        acc = Expression.one()
        for _ in range(k):
            acc = acc * self
        return acc

    def __eq__(self, other) -> bool:
        return isinstance(other, Expression) and self.monomials == other.monomials

    def __hash__(self):
        return hash(self.monomials)

    def is_zero(self) -> bool:
        return not self.monomials

    def atoms(self, kind=None):
        seen = []
        for m in self.monomials:
            for a in m.atoms:
                if kind is None or isinstance(a, kind):
                    if a not in seen:
                        seen.append(a)
        return seen

    def coefficient_of(self, atoms_multiset: tuple) -> Fraction:
        key = tuple(atom_key(a) for a in sorted(atoms_multiset, key=atom_key))
        for m in self.monomials:
            if m.key() == key:
                return m.coeff
        return Fraction(0)

    def map_monomials(self, fn) -> "Expression":
        out = []
        for m in self.monomials:
            out.extend(fn(m).monomials)
        return Expression(out)

    def __repr__(self):
        if not self.monomials:
            return "0"
        return " + ".join(map(repr, self.monomials))


def _as_expr(x) -> Expression:
    if isinstance(x, Expression):
        return x
    if isinstance(x, Monomial):
        return Expression((x,))
    if isinstance(x, (int, Fraction)):
        return Expression.from_coeff(x)
    if isinstance(
        x,
        (SSum, GplWord, ConstantSymbol, ExpFactor, AlternatingSign, RationalOfN, MellinKernel, DeltaOne),
    ):
        return Expression.from_atom(x)
    raise TypeError(f"cannot coerce {type(x).__name__} to Expression")


def _mul_monomials(m1: Monomial, m2: Monomial) -> Monomial:
    coeff = m1.coeff * m2.coeff
    atoms = []
    exp_base = Fraction(1)
    alt = 0
    ratn: RationalOfN | None = None
    for a in list(m1.atoms) + list(m2.atoms):
        if isinstance(a, ExpFactor):
            exp_base *= a.base
        elif isinstance(a, AlternatingSign):
            alt ^= 1
        elif isinstance(a, RationalOfN):
            if ratn is None:
                ratn = a
            else:
                c, ratn = ratn.mul(a)
                coeff *= c
        else:
            atoms.append(a)
    if exp_base != 1:
        atoms.append(ExpFactor(exp_base))
    if alt:
        atoms.append(ALT)
    if ratn is not None:
        atoms.append(ratn)
    return Monomial(coeff, atoms)


def exp_atoms(base: Fraction) -> list:
    """Atoms representing base^n for a signed rational base."""
    base = _frac(base)
    if base == 0:
        raise ValueError("zero exponential base")
    out = []
    if base < 0:
        out.append(ALT)
        base = -base
    if base != 1:
        out.append(ExpFactor(base))
    return out


def canonicalize(e: Expression) -> Expression:
    """Re-canonicalize (idempotent; expressions are canonical by construction)."""
    return Expression(e.monomials)
