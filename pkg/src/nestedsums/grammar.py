"""Text and JSON formats for expressions.

Human grammar (ASCII):

    S[a1,...,ak,{x1,...,xk},arg]   nested sum; arg: n, 2n, 2n+1, integer, inf
    Z[...]                          strict-inequality sum, converted on parse
    H[m1,...,mw,arg]                polylog; arg: x or a nonnegative rational
    M[H[...]/(a+x),n]               symbolic Mellin-transform atom
    delta[1-x]                      inverse-Mellin bookkeeping token
    z2, z3, ..., log2, gamma, pi, I*pi
    (-1)^n, 2^n, (1/2)^n            sign and exponential prefactors
    n, (n+1)^-2, ...                rational functions of n

``parse(print(e)) == e`` for canonical expressions; the JSON form
round-trips bit-exactly.
"""

from __future__ import annotations

import json
from fractions import Fraction

from .core import (
    ALT,
    DELTA,
    GAMMA,
    IPI,
    LOG2,
    N,
    PI,
    X,
    AlternatingSign,
    ConstantSymbol,
    DeltaOne,
    EvenArg,
    ExpFactor,
    Expression,
    FiniteArg,
    GplWord,
    InfinityArg,
    MellinKernel,
    Monomial,
    RationalOfN,
    SSum,
    SymbolArg,
    _poly_str,
    poly_mul,
    poly_normalize,
    zeta,
)

__all__ = ["parse", "print_expression", "to_json", "from_json", "ParseError"]


class ParseError(ValueError):
    def __init__(self, message, pos=None):
        self.pos = pos
        super().__init__(message if pos is None else f"{message} (at position {pos})")


# ---------------------------------------------------------------------------
# tokenizer
# ---------------------------------------------------------------------------

_SYMBOLS = "[]{}(),+-*/^"


def _tokenize(text):
    toks = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch in _SYMBOLS:
            toks.append((ch, ch, i))
            i += 1
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            toks.append(("INT", text[i:j], i))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            toks.append(("IDENT", text[i:j], i))
            i = j
            continue
        raise ParseError(f"unexpected character {ch!r}", i)
    toks.append(("EOF", "", n))
    return toks


class _Parser:
    def __init__(self, text):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self, k=0):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def next(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, kind):
        t = self.next()
        if t[0] != kind:
            raise ParseError(f"expected {kind!r}, found {t[1]!r}", t[2])
        return t

    def at(self, kind, value=None, k=0):
        t = self.peek(k)
        return t[0] == kind and (value is None or t[1] == value)

    # -- rational literals ------------------------------------------------

    def parse_rational(self):
        sign = 1
        if self.at("-"):
            self.next()
            sign = -1
        num = int(self.expect("INT")[1])
        if self.at("/") and self.peek(1)[0] == "INT":
            self.next()
            den = int(self.expect("INT")[1])
            return Fraction(sign * num, den)
        return Fraction(sign * num)

    # -- expression grammar ------------------------------------------------

    def parse_expression(self):
        neg = False
        if self.at("-"):
            self.next()
            neg = True
        e = self.parse_term()
        if neg:
            e = -e
        while self.at("+") or self.at("-"):
            op = self.next()[0]
            t = self.parse_term()
            e = e + t if op == "+" else e - t
        return e

    def parse_term(self):
        e = self.parse_factor()
        while self.at("*") or self.at("/"):
            op = self.next()[0]
            f = self.parse_factor()
            e = e * f if op == "*" else e * _invert(f, self)
        return e

    def parse_factor(self):
        base = self.parse_primary()
        if self.at("^"):
            self.next()
            if self.at("IDENT", "n"):
                self.next()
                return _to_exponential(base, self)
            k = self.parse_signed_int()
            if k >= 0:
                return base**k
            return _invert(base, self) ** (-k)
        return base

    def parse_signed_int(self):
        if self.at("("):
            self.next()
            v = self.parse_signed_int()
            self.expect(")")
            return v
        sign = 1
        if self.at("-"):
            self.next()
            sign = -1
        return sign * int(self.expect("INT")[1])

    def parse_primary(self):
        t = self.peek()
        if t[0] == "INT":
            return Expression.from_coeff(self.parse_rational())
        if t[0] == "(":
            self.next()
            e = self.parse_expression()
            self.expect(")")
            return e
        if t[0] == "IDENT":
            name = t[1]
            if name in ("S", "Z") and self.peek(1)[0] == "[":
                return self.parse_sum(name)
            if name == "H" and self.peek(1)[0] == "[":
                return self.parse_gpl()
            if name == "M" and self.peek(1)[0] == "[":
                return self.parse_mellin()
            if name == "delta" and self.peek(1)[0] == "[":
                return self.parse_delta()
            if name == "CS":
                raise ParseError(
                    "cyclotomic sums CS[...] are not supported by this engine", t[2]
                )
            self.next()
            if name == "n":
                return Expression.from_atom(RationalOfN((0, 1)))
            if name == "x":
                raise ParseError("bare polylog variable x outside H[...]", t[2])
            if name == "I":
                # only the combination I*pi is a legal constant
                if self.at("*") and self.peek(1)[0] == "IDENT" and self.peek(1)[1] == "pi":
                    self.next()
                    self.next()
                    return Expression.from_atom(IPI)
                raise ParseError("the imaginary unit only appears as I*pi", t[2])
            if name == "log2":
                return Expression.from_atom(LOG2)
            if name == "gamma":
                return Expression.from_atom(GAMMA)
            if name == "pi":
                return Expression.from_atom(PI)
            if name.startswith("z") and name[1:].isdigit():
                k = int(name[1:])
                if k < 2:
                    raise ParseError(f"no constant named {name!r}", t[2])
                return Expression.from_atom(zeta(k))
            raise ParseError(f"unknown name {name!r}", t[2])
        if t[0] == "-":
            self.next()
            return -self.parse_primary()
        raise ParseError(f"unexpected token {t[1]!r}", t[2])

    # -- bracketed forms -----------------------------------------------------

    def parse_sum_arg(self):
        t = self.peek()
        if t[0] == "IDENT" and t[1] == "n":
            self.next()
            return N
        if t[0] == "IDENT" and t[1] == "inf":
            self.next()
            return InfinityArg()
        if t[0] == "INT":
            v = int(self.next()[1])
            if self.at("IDENT", "n"):
                self.next()
                if v != 2:
                    raise ParseError("only 2n and 2n+1 arguments are supported", t[2])
                if self.at("+"):
                    self.next()
                    one = self.expect("INT")
                    if one[1] != "1":
                        raise ParseError("only 2n and 2n+1 arguments are supported", one[2])
                    return OddArgSingleton
                return EvenArgSingleton
            return FiniteArg(v)
        raise ParseError(f"bad sum argument {t[1]!r}", t[2])

    def parse_sum(self, head):
        self.next()  # S or Z
        self.expect("[")
        indices = [int(self.expect("INT")[1])]
        while self.at(",") and self.peek(1)[0] == "INT":
            self.next()
            indices.append(int(self.expect("INT")[1]))
        weights = None
        self.expect(",")
        if self.at("{"):
            self.next()
            weights = [self.parse_rational()]
            while self.at(","):
                self.next()
                weights.append(self.parse_rational())
            self.expect("}")
            self.expect(",")
        arg = self.parse_sum_arg()
        self.expect("]")
        if weights is None:
            # harmonic-sum shorthand: signed indices carry the weights
            weights = [Fraction(1) if a > 0 else Fraction(-1) for a in indices]
            indices = [abs(a) for a in indices]
        if len(weights) != len(indices):
            raise ParseError("index and weight lists differ in length")
        s = SSum(indices, weights, arg)
        if head == "Z":
            from .algebra import zsum_to_ssum

            return zsum_to_ssum(s)
        return Expression.from_atom(s)

    def parse_gpl(self):
        self.next()
        self.expect("[")
        items = []
        arg = None
        while True:
            if self.at("IDENT", "x"):
                self.next()
                arg = X
                break
            items.append(self.parse_rational())
            if self.at(","):
                self.next()
                continue
            break
        self.expect("]")
        if arg is None:
            if not items:
                raise ParseError("empty H[...]")
            arg = items.pop()
            if arg < 0:
                raise ParseError("H at a negative constant: transform with negate first")
        return Expression.from_atom(GplWord(items, arg))

    def parse_kernel(self):
        letters = ()
        if self.at("IDENT", "H"):
            e = self.parse_gpl()
            word = e.monomials[0].atoms[0]
            if not isinstance(word.arg, SymbolArg):
                raise ParseError("Mellin kernels take H[...,x] words")
            letters = word.letters
        elif self.at("INT", "1"):
            self.next()
        else:
            raise ParseError("Mellin kernel must be H[...,x] or 1")
        denom = None
        if self.at("/"):
            self.next()
            self.expect("(")
            if self.at("IDENT", "x"):
                self.next()
                op = self.next()
                if op[0] not in ("+", "-"):
                    raise ParseError("bad kernel denominator", op[2])
                a = self.parse_rational()
                denom = ("plus", a) if op[0] == "+" else ("minus", -a)
                if op[0] == "-":
                    raise ParseError("write 1/(a-x) with the constant first", op[2])
            else:
                a = self.parse_rational()
                op = self.next()
                if op[0] not in ("+", "-"):
                    raise ParseError("bad kernel denominator", op[2])
                if not self.at("IDENT", "x"):
                    raise ParseError("bad kernel denominator")
                self.next()
                denom = ("plus", a) if op[0] == "+" else ("minus", a)
            self.expect(")")
        return MellinKernel(letters, denom)

    def parse_mellin(self):
        self.next()
        self.expect("[")
        kernel = self.parse_kernel()
        self.expect(",")
        if not self.at("IDENT", "n"):
            raise ParseError("Mellin atoms are functions of n")
        self.next()
        self.expect("]")
        return Expression.from_atom(kernel)

    def parse_delta(self):
        self.next()
        self.expect("[")
        one = self.expect("INT")
        if one[1] != "1":
            raise ParseError("the delta token is written delta[1-x]", one[2])
        self.expect("-")
        if not self.at("IDENT", "x"):
            raise ParseError("the delta token is written delta[1-x]")
        self.next()
        self.expect("]")
        return Expression.from_atom(DELTA)


EvenArgSingleton = EvenArg()
OddArgSingleton = OddArg()


def _to_exponential(base: Expression, p: _Parser) -> Expression:
    if len(base.monomials) != 1 or base.monomials[0].atoms:
        raise ParseError("only rational bases may carry the exponent n")
    from .core import exp_atoms

    c = base.monomials[0].coeff
    return Expression((Monomial(1, exp_atoms(c)),))


def _factor_linear(num):
    """Factor an integer polynomial into (n+k) factors; None if impossible."""
    coeffs = list(num)
    factors = []
    lead = coeffs[-1]
    while len(coeffs) > 1:
        # rational roots -k: k = c0/clead divisors
        c0 = coeffs[0]
        if c0 == 0:
            from .core import _poly_divide_linear

            coeffs = list(_poly_divide_linear(tuple(coeffs), Fraction(0)))
            factors.append(Fraction(0))
            continue
        found = None
        c0n, c0d = Fraction(c0).numerator, Fraction(c0).denominator
        lead_n = Fraction(coeffs[-1]).numerator
        for p in _divisors(abs(c0n * c0d)):
            for q in _divisors(abs(lead_n)):
                for sign in (1, -1):
                    k = Fraction(sign * p, q)
                    from .core import _poly_divide_linear, poly_eval

                    if poly_eval(tuple(coeffs), -k) == 0:
                        quotient = _poly_divide_linear(tuple(coeffs), k)
                        if quotient is not None:
                            found = (k, quotient)
                            break
                if found:
                    break
            if found:
                break
        if not found:
            return None
        factors.append(found[0])
        coeffs = list(found[1])
    return factors if coeffs == [Fraction(1)] or coeffs == [1] else None


def _divisors(n):
    n = int(n)
    if n == 0:
        return [1]
    out = [d for d in range(1, abs(n) + 1) if n % d == 0]
    return out


def _invert(e: Expression, p) -> Expression:
    if len(e.monomials) != 1:
        raise ParseError("cannot divide by a sum of terms")
    m = e.monomials[0]
    coeff = 1 / m.coeff
    ratn = None
    for a in m.atoms:
        if isinstance(a, RationalOfN):
            if ratn is not None:
                raise ParseError("cannot invert this factor")
            ratn = a
        else:
            raise ParseError(f"cannot divide by {a!r}")
    if ratn is None:
        return Expression.from_coeff(coeff)
    roots = _factor_linear(ratn.num)
    if roots is None:
        raise ParseError("denominator polynomial does not factor into (n+k) terms")
    num = (Fraction(1),)
    for k, j in ratn.den:
        num = poly_mul(num, _linear_power(k, j))
    den = {}
    for k in roots:
        den[k] = den.get(k, 0) + 1
    c, atom = RationalOfN.make(num, tuple(den.items()))
    atoms = [] if atom is None else [atom]
    return Expression((Monomial(coeff * c, atoms),))


def _linear_power(k: Fraction, j: int):
    out = (Fraction(1),)
    for _ in range(j):
        out = poly_mul(out, (k, Fraction(1)))
    return out


def parse(text: str) -> Expression:
    """Parse the ASCII expression grammar into a canonical Expression."""
    p = _Parser(text)
    e = p.parse_expression()
    p.expect("EOF")
    return e


# ---------------------------------------------------------------------------
# printing
# ---------------------------------------------------------------------------


def _fmt_rat(x: Fraction) -> str:
    return str(x)


def _fmt_sum_arg(arg) -> str:
    if isinstance(arg, SymbolArg):
        return arg.name
    if isinstance(arg, EvenArg):
        return "2n"
    if isinstance(arg, OddArg):
        return "2n+1"
    if isinstance(arg, FiniteArg):
        return str(arg.value)
    if isinstance(arg, InfinityArg):
        return "inf"
    raise TypeError(f"bad argument {arg!r}")


def _fmt_atom(atom) -> str:
    if isinstance(atom, SSum):
        idx = ",".join(map(str, atom.indices))
        ws = ",".join(map(_fmt_rat, atom.weights))
        return f"S[{idx},{{{ws}}},{_fmt_sum_arg(atom.arg)}]"
    if isinstance(atom, GplWord):
        arg = "x" if isinstance(atom.arg, SymbolArg) else _fmt_rat(atom.arg)
        if atom.letters:
            return f"H[{','.join(map(_fmt_rat, atom.letters))},{arg}]"
        return f"H[{arg}]"
    if isinstance(atom, ConstantSymbol):
        return repr(atom)
    if isinstance(atom, ExpFactor):
        b = atom.base
        return f"{b}^n" if b.denominator == 1 else f"({b})^n"
    if isinstance(atom, AlternatingSign):
        return "(-1)^n"
    if isinstance(atom, RationalOfN):
        parts = []
        if atom.num != (Fraction(1),):
            parts.append(_poly_str(atom.num))
        for k, j in atom.den:
            base = "n" if k == 0 else f"(n+{k})" if k > 0 else f"(n-{-k})"
            parts.append(f"{base}^-{j}" if j != 1 or True else base)
        return "*".join(parts)
    if isinstance(atom, MellinKernel):
        return f"M[{_fmt_kernel(atom)},n]"
    if isinstance(atom, DeltaOne):
        return "delta[1-x]"
    raise TypeError(f"bad atom {atom!r}")


def _fmt_kernel(k: MellinKernel) -> str:
    word = f"H[{','.join(map(_fmt_rat, k.letters))},x]" if k.letters else "1"
    if k.denom is None:
        return word
    side, a = k.denom
    return f"{word}/({a}+x)" if side == "plus" else f"{word}/({a}-x)"


_PRINT_RANK = {
    AlternatingSign: 0,
    ExpFactor: 1,
    RationalOfN: 2,
    ConstantSymbol: 3,
    GplWord: 4,
    SSum: 5,
    MellinKernel: 6,
    DeltaOne: 7,
}


def _fmt_monomial(m: Monomial) -> str:
    from .core import atom_key

    groups = []
    run = None
    for a in sorted(m.atoms, key=lambda a: (_PRINT_RANK[type(a)], atom_key(a))):
        if run and run[0] == a:
            run[1] += 1
        else:
            if run:
                groups.append(run)
            run = [a, 1]
    if run:
        groups.append(run)
    parts = []
    for atom, power in groups:
        s = _fmt_atom(atom)
        if power > 1:
            if "^" in s and not s.startswith("("):
                s = f"({s})"
            s = f"{s}^{power}"
        parts.append(s)
    c = m.coeff
    if not parts:
        return _fmt_rat(c)
    body = "*".join(parts)
    if c == 1:
        return body
    if c == -1:
        return f"-{body}"
    return f"{_fmt_rat(c)}*{body}"


def print_expression(e: Expression, format: str = "human") -> str:
    """Deterministic text form of an expression."""
    if format == "json":
        return to_json(e)
    if format != "human":
        raise ValueError(f"unknown format {format!r}")
    if not e.monomials:
        return "0"
    out = []
    for i, m in enumerate(e.monomials):
        s = _fmt_monomial(m)
        if i == 0:
            out.append(s)
        elif s.startswith("-"):
            out.append(" - " + s[1:])
        else:
            out.append(" + " + s)
    return "".join(out)


# ---------------------------------------------------------------------------
# JSON form
# ---------------------------------------------------------------------------


def _arg_to_json(arg):
    if isinstance(arg, SymbolArg):
        return arg.name
    if isinstance(arg, EvenArg):
        return "2n"
    if isinstance(arg, OddArg):
        return "2n+1"
    if isinstance(arg, InfinityArg):
        return "inf"
    if isinstance(arg, FiniteArg):
        return str(arg.value)
    if isinstance(arg, Fraction):
        return _fmt_rat(arg)
    raise TypeError(f"bad argument {arg!r}")


def _arg_from_json(s, gpl=False):
    if gpl:
        return X if s == "x" else Fraction(s)
    if s == "n":
        return N
    if s == "2n":
        return EvenArgSingleton
    if s == "2n+1":
        return OddArgSingleton
    if s == "inf":
        return InfinityArg()
    return FiniteArg(int(s))


def _atom_to_json(atom):
    if isinstance(atom, SSum):
        return {
            "t": "ssum",
            "a": list(atom.indices),
            "x": [_fmt_rat(w) for w in atom.weights],
            "arg": _arg_to_json(atom.arg),
        }
    if isinstance(atom, GplWord):
        return {"t": "gpl", "m": [_fmt_rat(m) for m in atom.letters], "arg": _arg_to_json(atom.arg)}
    if isinstance(atom, ConstantSymbol):
        d = {"t": "const", "kind": atom.kind}
        if atom.kind == "zeta":
            d["k"] = atom.data[0]
        if atom.kind == "aux":
            d["name"] = atom.data[0]
        return d
    if isinstance(atom, ExpFactor):
        return {"t": "exp", "base": _fmt_rat(atom.base)}
    if isinstance(atom, AlternatingSign):
        return {"t": "alt"}
    if isinstance(atom, RationalOfN):
        return {
            "t": "ratn",
            "num": [_fmt_rat(c) for c in atom.num],
            "den": [[_fmt_rat(k), j] for k, j in atom.den],
        }
    if isinstance(atom, MellinKernel):
        return {
            "t": "mellin",
            "m": [_fmt_rat(m) for m in atom.letters],
            "denom": list((atom.denom[0], _fmt_rat(atom.denom[1]))) if atom.denom else None,
        }
    if isinstance(atom, DeltaOne):
        return {"t": "delta"}
    raise TypeError(f"bad atom {atom!r}")


def _atom_from_json(d):
    t = d["t"]
    if t == "ssum":
        return SSum(d["a"], [Fraction(x) for x in d["x"]], _arg_from_json(d["arg"]))
    if t == "gpl":
        return GplWord([Fraction(m) for m in d["m"]], _arg_from_json(d["arg"], gpl=True))
    if t == "const":
        kind = d["kind"]
        if kind == "zeta":
            return zeta(d["k"])
        if kind == "aux":
            return ConstantSymbol("aux", (d["name"],))
        return ConstantSymbol(kind)
    if t == "exp":
        return ExpFactor(Fraction(d["base"]))
    if t == "alt":
        return ALT
    if t == "ratn":
        return RationalOfN(
            [Fraction(c) for c in d["num"]], [(Fraction(k), j) for k, j in d["den"]]
        )
    if t == "mellin":
        denom = tuple(d["denom"]) if d["denom"] else None
        if denom:
            denom = (denom[0], Fraction(denom[1]))
        return MellinKernel([Fraction(m) for m in d["m"]], denom)
    if t == "delta":
        return DELTA
    raise ValueError(f"unknown atom tag {t!r}")


def to_json(e: Expression) -> str:
    doc = {
        "monomials": [
            {"coeff": _fmt_rat(m.coeff), "atoms": [_atom_to_json(a) for a in m.atoms]}
            for m in e.monomials
        ]
    }
    return json.dumps(doc, separators=(",", ":"), sort_keys=True)


def from_json(text: str) -> Expression:
    doc = json.loads(text)
    mons = [
        Monomial(Fraction(m["coeff"]), [_atom_from_json(a) for a in m["atoms"]])
        for m in doc["monomials"]
    ]
    return Expression(mons)
