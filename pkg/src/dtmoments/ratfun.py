"""Closed rational forms for graded products of geometric series.

A term a_1...a_k / ((1-u_1)...(1-u_m)) with degree-N forms u_i multiplies
under the graded product into a single fraction whose denominator collects
all pairwise sums u_i + v_j and whose numerator is a universal polynomial
P^{k,l}_{m,n} in abstract u/v symbols.  This module builds that polynomial
by exact division, applies it to concrete forms, and expands the resulting
rational expressions back into truncated series.
"""

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations

from .fps import Series, VariableRegistry, _norm_coeff, geometric


class ExactDivisionError(ArithmeticError):
    """A division that must be remainder-free left a remainder (a bug)."""


class DistinctnessViolation(ValueError):
    """The pairwise sums u_i + v_j of a closed product are not distinct."""


# -- raw polynomial dictionaries ----------------------------------------------------
#
# The heavy arithmetic (building Q and dividing it down to P) runs on plain
# {exponent tuple: int} dicts; SymPoly is a thin wrapper used at the API
# boundary.


def _padd(a: dict, b: dict) -> dict:
    out = dict(a)
    for e, c in b.items():
        v = out.get(e, 0) + c
        if v:
            out[e] = v
        elif e in out:
            del out[e]
    return out


def _pmul(a: dict, b: dict) -> dict:
    if len(a) > len(b):
        a, b = b, a
    out: dict = {}
    for e1, c1 in a.items():
        for e2, c2 in b.items():
            key = tuple(x + y for x, y in zip(e1, e2))
            v = out.get(key, 0) + c1 * c2
            if v:
                out[key] = v
            elif key in out:
                del out[key]
    return out


def _pscale(a: dict, c) -> dict:
    if c == 0:
        return {}
    return {e: v * c for e, v in a.items()}


def _pmono(size: int, idx_pows) -> tuple:
    e = [0] * size
    for idx, p in idx_pows:
        e[idx] += p
    return tuple(e)


def _div_linear(terms: dict, main: int, c0: dict, c1: int) -> dict:
    """Exact division by c1*x_main + c0 with c0 free of x_main, c1 = +-1.

    Standard long division in x_main; the unit leading coefficient keeps
    everything in integers.  Raises ExactDivisionError on a nonzero
    remainder.
    """
    quot: dict = {}
    cur = dict(terms)
    while True:
        d = 0
        for e in cur:
            if e[main] > d:
                d = e[main]
        if d == 0:
            break
        top = [(e, c) for e, c in cur.items() if e[main] == d]
        for e, c in top:
            qc = c if c1 == 1 else -c
            qe = e[:main] + (d - 1,) + e[main + 1 :]
            quot[qe] = quot.get(qe, 0) + qc
            del cur[e]
            for e0, v0 in c0.items():
                ne = tuple(x + y for x, y in zip(qe, e0))
                v = cur.get(ne, 0) - qc * v0
                if v:
                    cur[ne] = v
                elif ne in cur:
                    del cur[ne]
    if cur:
        raise ExactDivisionError("division expected to be exact left a remainder")
    return quot


# -- symbolic polynomials ------------------------------------------------------------


class SymPoly:
    """Sparse polynomial in named abstract symbols with exact coefficients."""

    __slots__ = ("symbols", "terms")

    def __init__(self, symbols, terms=(), _checked=False):
        symbols = tuple(symbols)
        if len(set(symbols)) != len(symbols):
            raise ValueError("symbols must be distinct")
        self.symbols = symbols
        if _checked:
            self.terms = terms
            return
        size = len(symbols)
        clean: dict = {}
        items = terms.items() if hasattr(terms, "items") else terms
        for exps, c in items:
            exps = tuple(exps)
            if len(exps) != size or any(not isinstance(x, int) or x < 0 for x in exps):
                raise ValueError(f"bad exponent tuple {exps} for {size} symbols")
            c = _norm_coeff(c)
            if c == 0:
                continue
            clean[exps] = clean.get(exps, 0) + c
            if clean[exps] == 0:
                del clean[exps]
        self.terms = clean

    def __setattr__(self, name, value):
        if hasattr(self, "terms"):
            raise AttributeError("SymPoly is immutable")
        object.__setattr__(self, name, value)

    # -- constructors --

    @classmethod
    def constant(cls, symbols, c) -> "SymPoly":
        return cls(symbols, {(0,) * len(tuple(symbols)): c})

    @classmethod
    def one(cls, symbols) -> "SymPoly":
        return cls.constant(symbols, 1)

    @classmethod
    def zero(cls, symbols) -> "SymPoly":
        return cls(symbols, {}, _checked=True)

    @classmethod
    def symbol(cls, symbols, name) -> "SymPoly":
        symbols = tuple(symbols)
        e = [0] * len(symbols)
        e[symbols.index(name)] = 1
        return cls(symbols, {tuple(e): 1}, _checked=True)

    # -- basics --

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def sorted_terms(self):
        return sorted(
            self.terms.items(),
            key=lambda kv: (sum(kv[0]), tuple(-x for x in kv[0])),
        )

    def _require_same(self, other: "SymPoly") -> None:
        if self.symbols != other.symbols:
            raise ValueError("operands use different symbol tuples")

    def __eq__(self, other):
        if not isinstance(other, SymPoly):
            return NotImplemented
        return self.symbols == other.symbols and self.terms == other.terms

    __hash__ = None

    def __repr__(self):
        return f"SymPoly({self.pretty()})"

    # -- arithmetic --

    def __add__(self, other):
        if not isinstance(other, SymPoly):
            return NotImplemented
        self._require_same(other)
        return SymPoly(self.symbols, _padd(self.terms, other.terms), _checked=True)

    def __neg__(self):
        return SymPoly(self.symbols, {e: -c for e, c in self.terms.items()}, _checked=True)

    def __sub__(self, other):
        if not isinstance(other, SymPoly):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return SymPoly(self.symbols, _pscale(self.terms, _norm_coeff(other)), _checked=True)
        if not isinstance(other, SymPoly):
            return NotImplemented
        self._require_same(other)
        return SymPoly(self.symbols, _pmul(self.terms, other.terms), _checked=True)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * other
        return NotImplemented

    def times_monomial(self, exps, coeff=1) -> "SymPoly":
        exps = tuple(exps)
        out = {
            tuple(x + y for x, y in zip(e, exps)): c * coeff
            for e, c in self.terms.items()
        }
        return SymPoly(self.symbols, out, _checked=True)

    # -- structure --

    def restricted(self) -> "SymPoly":
        """Drop symbols that appear in no term."""
        used = [i for i in range(len(self.symbols)) if any(e[i] for e in self.terms)]
        if len(used) == len(self.symbols):
            return self
        syms = tuple(self.symbols[i] for i in used)
        terms = {tuple(e[i] for i in used): c for e, c in self.terms.items()}
        return SymPoly(syms, terms, _checked=True)

    def with_symbols(self, symbols, rename=None) -> "SymPoly":
        """Re-express over another symbol tuple.  ``rename`` maps old names
        to new ones (identity by default); two old symbols may map to the
        same new symbol, in which case their exponents add."""
        symbols = tuple(symbols)
        rename = rename or {}
        where = []
        pos = {s: i for i, s in enumerate(symbols)}
        for s in self.symbols:
            t = rename.get(s, s)
            if t not in pos:
                raise ValueError(f"symbol {t!r} missing from the target tuple")
            where.append(pos[t])
        out: dict = {}
        for e, c in self.terms.items():
            ne = [0] * len(symbols)
            for w, x in zip(where, e):
                ne[w] += x
            key = tuple(ne)
            v = out.get(key, 0) + c
            if v:
                out[key] = v
            elif key in out:
                del out[key]
        return SymPoly(symbols, out, _checked=True)

    def substitute_series(self, assignment: dict, registry: VariableRegistry, trunc: int) -> Series:
        """Evaluate at concrete series, one per symbol, truncated at D."""
        powers: dict[tuple[str, int], Series] = {}

        def power(name: str, k: int) -> Series:
            key = (name, k)
            if key not in powers:
                if k == 0:
                    powers[key] = Series.one(registry, trunc)
                else:
                    powers[key] = power(name, k - 1) * assignment[name].with_trunc(trunc)
            return powers[key]

        acc = Series.zero(registry, trunc)
        for e, c in self.terms.items():
            term = Series.one(registry, trunc)
            for name, x in zip(self.symbols, e):
                if x:
                    term = term * power(name, x)
            acc = acc + term.scale(c)
        return acc

    # -- rendering --

    def pretty(self, names=None) -> str:
        """Human form, e.g. '2 - u1 - u2 - v1 - v2'."""
        names = names or {s: s for s in self.symbols}
        if not self.terms:
            return "0"
        pieces = []
        for e, c in self.sorted_terms():
            mono = "".join(
                f"{names[s]}" + (f"^{x}" if x > 1 else "")
                for s, x in zip(self.symbols, e)
                if x
            )
            f = Fraction(c)
            mag = abs(f)
            if not mono:
                body = str(mag) if mag.denominator == 1 else f"{mag.numerator}/{mag.denominator}"
            elif mag == 1:
                body = mono
            elif mag.denominator == 1:
                body = f"{mag.numerator}{mono}"
            else:
                body = f"({mag.numerator}/{mag.denominator}){mono}"
            if not pieces:
                pieces.append(body if f > 0 else f"-{body}")
            else:
                pieces.append(("+ " if f > 0 else "- ") + body)
        return " ".join(pieces)

    def to_json_dict(self) -> dict:
        terms = []
        for e, c in self.sorted_terms():
            f = Fraction(c)
            terms.append({"exps": list(e), "num": f.numerator, "den": f.denominator})
        return {"symbols": list(self.symbols), "terms": terms}


# -- the universal numerator polynomials ----------------------------------------------


@lru_cache(maxsize=None)
def uv_symbols(m: int, n: int) -> tuple:
    return tuple(f"u{i}" for i in range(1, m + 1)) + tuple(
        f"v{j}" for j in range(1, n + 1)
    )


@lru_cache(maxsize=None)
def _q_basis(m: int, n: int) -> tuple:
    """Per cell (i,j): the k,l-independent factor of the Q sum, namely
    sign * prod_{(i',j') != (i,j)} (1 - u_i' - v_j')
         * prod_{p<q, p,q != i} (u_p - u_q)
         * prod_{r<s, r,s != j} (v_r - v_s).
    The big product over all cells is built once and each cell divides one
    trinomial back out.
    """
    size = m + n
    one = {(0,) * size: 1}
    full = one
    for i in range(m):
        for j in range(n):
            tri = {
                (0,) * size: 1,
                _pmono(size, [(i, 1)]): -1,
                _pmono(size, [(m + j, 1)]): -1,
            }
            full = _pmul(full, tri)

    vd_u = []
    for i in range(m):
        prod = one
        for p, q in combinations(range(m), 2):
            if p != i and q != i:
                prod = _pmul(
                    prod,
                    {_pmono(size, [(p, 1)]): 1, _pmono(size, [(q, 1)]): -1},
                )
        vd_u.append(prod)
    vd_v = []
    for j in range(n):
        prod = one
        for r, s in combinations(range(n), 2):
            if r != j and s != j:
                prod = _pmul(
                    prod,
                    {_pmono(size, [(m + r, 1)]): 1, _pmono(size, [(m + s, 1)]): -1},
                )
        vd_v.append(prod)

    basis = []
    for i in range(m):
        for j in range(n):
            c0 = _padd({(0,) * size: 1}, {_pmono(size, [(m + j, 1)]): -1})
            cof = _div_linear(full, i, c0, -1)
            cell = _pmul(cof, _pmul(vd_u[i], vd_v[j]))
            if (i + j) % 2:
                cell = _pscale(cell, -1)
            basis.append(cell)
    return tuple(basis)


def q_polynomial(m: int, n: int, k: int, l: int) -> SymPoly:
    """The undivided numerator: the signed double sum over cells (i,j) with
    cell powers u_i^{m-k-1} v_j^{n-l-1}."""
    if not (0 <= k <= m - 1 and 0 <= l <= n - 1):
        raise ValueError("need 0 <= k <= m-1 and 0 <= l <= n-1")
    size = m + n
    basis = _q_basis(m, n)
    acc: dict = {}
    for i in range(m):
        for j in range(n):
            shift = _pmono(size, [(i, m - k - 1), (m + j, n - l - 1)])
            cell = basis[i * n + j]
            for e, c in cell.items():
                key = tuple(x + y for x, y in zip(e, shift))
                v = acc.get(key, 0) + c
                if v:
                    acc[key] = v
                elif key in acc:
                    del acc[key]
    return SymPoly(uv_symbols(m, n), acc, _checked=True)


@lru_cache(maxsize=None)
def _row_products(m: int, n: int) -> tuple:
    """Per row i: prod of (1 - u_i' - v_j) over all cells outside row i."""
    size = m + n
    rows = []
    for i in range(m):
        prod = {(0,) * size: 1}
        for ip in range(m):
            if ip == i:
                continue
            for j in range(n):
                tri = {
                    (0,) * size: 1,
                    _pmono(size, [(ip, 1)]): -1,
                    _pmono(size, [(m + j, 1)]): -1,
                }
                prod = _pmul(prod, tri)
        rows.append(prod)
    return tuple(rows)


@lru_cache(maxsize=None)
def p_polynomial(m: int, n: int, k: int, l: int) -> SymPoly:
    """The closed-form product numerator, i.e. q_polynomial divided (exactly)
    by both difference products prod_{p<q}(u_p-u_q) and prod_{r<s}(v_r-v_s).

    Summing the defining double sum over each column in closed form first
    collapses the quotient to a single sum over rows,

        P = sum_i u_i^K (1-u_i)^L prod_{i'!=i, j}(1 - u_i' - v_j)
                  / prod_{p!=i}(u_i - u_p),

    with K = m-k-1, L = n-l-1 (the column sum is a divided difference of
    y^L/(1-x-y) over the v's, which kills the polynomial part of degree
    <= n-2 and turns the pole into prod_j(1-x-v_j)).  The remaining row sum
    is the (m-1)-st divided difference over the u's of the node values
    N_i = u_i^K (1-u_i)^L prod_{i'!=i, j}(1 - u_i' - v_j), so a Newton
    table evaluates it with C(m,2) exact linear divisions; swapping any two
    u's inside a window flips the window's partial sum, which is exactly
    the divisibility that makes every table step remainder-free.  Compared
    with dividing Q directly this keeps intermediates near the size of P
    itself instead of the size of Q.
    """
    if not (0 <= k <= m - 1 and 0 <= l <= n - 1):
        raise ValueError("need 0 <= k <= m-1 and 0 <= l <= n-1")
    size = m + n
    K = m - k - 1
    L = n - l - 1
    rows = _row_products(m, n)
    nodes = []
    for i in range(m):
        weight = {
            _pmono(size, [(i, K + t)]): (-1) ** t * math.comb(L, t)
            for t in range(L + 1)
        }
        nodes.append(_pmul(rows[i], weight))
    while len(nodes) > 1:
        r = m - len(nodes) + 1
        nodes = [
            _div_linear(
                _padd(nodes[i + 1], _pscale(nodes[i], -1)),
                i + r,
                {_pmono(size, [(i, 1)]): -1},
                1,
            )
            for i in range(len(nodes) - 1)
        ]
    return SymPoly(uv_symbols(m, n), nodes[0], _checked=True)


# -- concrete degree-N forms and rational expressions -----------------------------------


_ZW_NAME = re.compile(r"^([zw])([0-9]+)$")


def _display_order(registry: VariableRegistry) -> tuple:
    """Variable positions in display order: all z's by index, then all w's,
    when the names follow the z/w convention; plain registry order else."""
    keys = []
    for pos, name in enumerate(registry.names):
        m = _ZW_NAME.match(name)
        if not m:
            return tuple(range(registry.size))
        keys.append((0 if m.group(1) == "z" else 1, int(m.group(2)), pos))
    return tuple(pos for _, _, pos in sorted(keys))


def _display_mono(registry: VariableRegistry, exps) -> str:
    order = _display_order(registry)
    names = registry.names
    return "".join(
        f"{names[p]}" + (f"^{exps[p]}" if exps[p] > 1 else "")
        for p in order
        if exps[p]
    )


def form_id(form: Series) -> str:
    """Canonical identifier of a form: its canonical rendering.  Equal
    polynomials get equal ids, term order is fixed by sorted_terms."""
    if form.is_zero():
        raise ValueError("the zero polynomial cannot be a denominator form")
    pieces = []
    for exps, c in form.sorted_terms():
        mono = _display_mono(form.registry, exps)
        f = Fraction(c)
        if f == 1:
            body = mono or "1"
        elif f == -1:
            body = f"-{mono or '1'}"
        else:
            s = str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"
            body = f"{s}{mono}" if mono else s
        pieces.append(body)
    return "+".join(pieces).replace("+-", "-")


class FormTable:
    """Insertion-ordered registry of concrete degree-N forms keyed by their
    canonical ids."""

    def __init__(self, registry: VariableRegistry):
        self.registry = registry
        self.forms: dict[str, Series] = {}

    def add(self, form: Series) -> str:
        if form.registry != self.registry:
            raise ValueError("form registry differs from the table registry")
        N = self.registry.modulus
        if any(sum(e) != N for e in form.terms):
            raise ValueError(f"denominator forms must be homogeneous of degree {N}")
        fid = form_id(form)
        if fid not in self.forms:
            self.forms[fid] = form.with_trunc(N)
        return fid

    def get(self, fid: str) -> Series:
        return self.forms[fid]

    def __contains__(self, fid: str) -> bool:
        return fid in self.forms

    def display_names(self) -> dict[str, str]:
        """Stable short aliases u1, u2, ... in insertion order."""
        return {fid: f"u{i}" for i, fid in enumerate(self.forms, start=1)}


@dataclass(frozen=True)
class RationalTerm:
    """prefix * numerator / prod_{id in denominator} (1 - form_id)."""

    prefix: tuple
    numerator: SymPoly
    denominator: tuple


class RationalExpr:
    """A sum of rational terms over a shared form table."""

    __slots__ = ("registry", "table", "terms")

    def __init__(self, registry: VariableRegistry, table: FormTable, terms):
        if table.registry != registry:
            raise ValueError("form table registry differs from the expression registry")
        for t in terms:
            if len(t.prefix) != registry.size:
                raise ValueError("prefix exponents do not match the registry")
            if sum(t.prefix) % registry.modulus != 0:
                raise ValueError("prefix degree breaks the support constraint")
            for fid in t.denominator:
                if fid not in table:
                    raise ValueError(f"denominator id {fid!r} missing from the form table")
            for s in t.numerator.symbols:
                if s not in table:
                    raise ValueError(f"numerator symbol {s!r} missing from the form table")
        self.registry = registry
        self.table = table
        self.terms = tuple(terms)

    def __setattr__(self, name, value):
        if hasattr(self, "terms"):
            raise AttributeError("RationalExpr is immutable")
        object.__setattr__(self, name, value)

    # -- constructors --

    @classmethod
    def single(cls, registry, prefix, numerator, denominators) -> "RationalExpr":
        """One term.  ``numerator`` is a constant or a SymPoly whose symbols
        are canonical form ids; ``denominators`` are concrete form Series."""
        table = FormTable(registry)
        ids = sorted(table.add(f) for f in denominators)
        if isinstance(numerator, (int, Fraction)):
            numerator = SymPoly.constant((), numerator)
        for s in numerator.symbols:
            if s not in table:
                raise ValueError(f"numerator symbol {s!r} is not a registered form id")
        term = RationalTerm(tuple(prefix), numerator, tuple(ids))
        return cls(registry, table, [term])

    @classmethod
    def geometric_term(cls, registry, form: Series) -> "RationalExpr":
        """1/(1 - form)."""
        return cls.single(registry, (0,) * registry.size, 1, [form])

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        if not isinstance(other, RationalExpr):
            return NotImplemented
        return (
            self.registry == other.registry
            and self.table.forms == other.table.forms
            and self.terms == other.terms
        )

    __hash__ = None

    def __repr__(self):
        return f"RationalExpr({len(self.terms)} terms, {len(self.table.forms)} forms)"

    # -- algebra --

    @staticmethod
    def _merged(terms) -> list:
        keyed: dict = {}
        order: list = []
        for t in terms:
            key = (t.prefix, t.denominator)
            if key in keyed:
                old = keyed[key]
                syms = tuple(sorted(set(old.numerator.symbols) | set(t.numerator.symbols)))
                num = old.numerator.with_symbols(syms) + t.numerator.with_symbols(syms)
                keyed[key] = RationalTerm(t.prefix, num, t.denominator)
            else:
                keyed[key] = t
                order.append(key)
        return [keyed[k] for k in order if not keyed[k].numerator.is_zero()]

    def __add__(self, other):
        if not isinstance(other, RationalExpr):
            return NotImplemented
        if self.registry != other.registry:
            raise ValueError("operands live over different variable registries")
        table = FormTable(self.registry)
        for f in self.table.forms.values():
            table.add(f)
        for f in other.table.forms.values():
            table.add(f)
        return RationalExpr(
            self.registry, table, self._merged(list(self.terms) + list(other.terms))
        )

    def scale_prefix(self, exps) -> "RationalExpr":
        exps = tuple(exps)
        terms = [
            RationalTerm(
                tuple(a + b for a, b in zip(t.prefix, exps)), t.numerator, t.denominator
            )
            for t in self.terms
        ]
        return RationalExpr(self.registry, self.table, terms)

    def with_denominator(self, form: Series) -> "RationalExpr":
        """Multiply the whole expression by 1/(1 - form)."""
        table = FormTable(self.registry)
        for f in self.table.forms.values():
            table.add(f)
        fid = table.add(form)
        terms = [
            RationalTerm(t.prefix, t.numerator, tuple(sorted(t.denominator + (fid,))))
            for t in self.terms
        ]
        return RationalExpr(self.registry, table, terms)

    def substitute(self, target: VariableRegistry, name_map: dict) -> "RationalExpr":
        """Rename variables into another registry; form ids are recomputed."""
        table = FormTable(target)
        rename: dict[str, str] = {}
        for fid, f in self.table.forms.items():
            rename[fid] = table.add(f.rename(target, name_map))
        where = [target.index(name_map[name]) for name in self.registry.names]
        terms = []
        for t in self.terms:
            prefix = [0] * target.size
            for w, e in zip(where, t.prefix):
                prefix[w] = e
            new_syms = tuple(sorted({rename[s] for s in t.numerator.symbols}))
            num = t.numerator.with_symbols(new_syms, rename)
            den = tuple(sorted(rename[fid] for fid in t.denominator))
            terms.append(RationalTerm(tuple(prefix), num, den))
        return RationalExpr(target, table, terms)

    # -- evaluation --

    def expand(self, trunc: int) -> Series:
        acc = Series.zero(self.registry, trunc)
        for t in self.terms:
            budget = trunc - sum(t.prefix)
            if budget < 0:
                continue
            part = t.numerator.substitute_series(
                {s: self.table.get(s) for s in t.numerator.symbols},
                self.registry,
                budget,
            )
            for fid in t.denominator:
                if part.is_zero():
                    break
                part = part * geometric(self.table.get(fid), budget)
            acc = acc + part.with_trunc(trunc).shift(t.prefix)
        return acc

    # -- rendering --

    def pretty(self) -> str:
        alias = self.table.display_names()
        lines = [f"{alias[fid]} = {fid}" for fid in self.table.forms]
        pieces = []
        for t in self.terms:
            mono = _display_mono(self.registry, t.prefix)
            num = t.numerator.pretty(names=alias)
            if num == "1":
                top = mono or "1"
            elif len(t.numerator.terms) > 1 or mono:
                top = f"{mono}({num})" if mono else f"({num})"
            else:
                top = num
            den = "".join(f"(1-{alias[fid]})" for fid in t.denominator)
            if len(t.denominator) > 1:
                den = f"({den})"
            pieces.append(f"{top}/{den}" if den else top)
        lines.append(" + ".join(pieces) if pieces else "0")
        return "\n".join(lines)

    def to_json_dict(self) -> dict:
        pairs = self.registry.pair_count
        terms = []
        for t in self.terms:
            zs: list[int] = []
            ws: list[int] = []
            for i in range(pairs):
                zs.extend([i + 1] * t.prefix[2 * i])
                ws.extend([i + 1] * t.prefix[2 * i + 1])
            terms.append(
                {
                    "prefix": {"z": zs, "w": ws},
                    "numerator": t.numerator.to_json_dict(),
                    "denominator": list(t.denominator),
                }
            )
        return {
            "terms": terms,
            "forms": {fid: f.to_json_dict() for fid, f in self.table.forms.items()},
        }


# -- the closed product ------------------------------------------------------------------


def _odot_pair(registry, table, forms1, t1: RationalTerm, forms2, t2: RationalTerm) -> RationalTerm:
    m = len(t1.denominator)
    n = len(t2.denominator)
    if m == 0 or n == 0:
        raise ValueError("closed products need at least one denominator factor per side")
    N = registry.modulus
    us = [forms1[fid] for fid in t1.denominator]
    vs = [forms2[fid] for fid in t2.denominator]
    sums = [[us[i] + vs[j] for j in range(n)] for i in range(m)]
    sum_ids = [[form_id(sums[i][j]) for j in range(n)] for i in range(m)]
    flat = [sum_ids[i][j] for i in range(m) for j in range(n)]
    if len(set(flat)) != m * n:
        seen: dict[str, int] = {}
        for fid in flat:
            seen[fid] = seen.get(fid, 0) + 1
        collisions = sorted(fid for fid, cnt in seen.items() if cnt > 1)
        raise DistinctnessViolation(
            "pairwise denominator sums collide: " + "; ".join(collisions)
        )

    k_pref = sum(t1.prefix) // N
    l_pref = sum(t2.prefix) // N
    u_ids = [form_id(u) for u in us]
    v_ids = [form_id(v) for v in vs]
    out_syms = tuple(
        sorted(
            set(u_ids)
            | set(v_ids)
            | set(t1.numerator.symbols)
            | set(t2.numerator.symbols)
        )
    )
    acc = SymPoly.zero(out_syms)
    for e1, c1 in t1.numerator.terms.items():
        for e2, c2 in t2.numerator.terms.items():
            k_eff = k_pref + sum(e1)
            l_eff = l_pref + sum(e2)
            if k_eff > m - 1 or l_eff > n - 1:
                raise ValueError(
                    "closed product needs (prefix + numerator) shorter than the denominator"
                )
            p = p_polynomial(m, n, k_eff, l_eff)
            rename = {f"u{i+1}": u_ids[i] for i in range(m)}
            rename.update({f"v{j+1}": v_ids[j] for j in range(n)})
            piece = p.with_symbols(out_syms, rename)
            mono1 = SymPoly(t1.numerator.symbols, {e1: c1}, _checked=True).with_symbols(out_syms)
            mono2 = SymPoly(t2.numerator.symbols, {e2: c2}, _checked=True).with_symbols(out_syms)
            acc = acc + piece * mono1 * mono2

    den = []
    for i in range(m):
        for j in range(n):
            den.append(table.add(sums[i][j]))
    acc = acc.restricted()
    lookup = dict(zip(u_ids, us))
    lookup.update(zip(v_ids, vs))
    lookup.update((s, forms1[s]) for s in t1.numerator.symbols)
    lookup.update((s, forms2[s]) for s in t2.numerator.symbols)
    for s in acc.symbols:
        table.add(lookup[s])
    prefix = tuple(a + b for a, b in zip(t1.prefix, t2.prefix))
    return RationalTerm(prefix, acc, tuple(sorted(den)))


def odot_closed(e1: RationalExpr, e2: RationalExpr) -> RationalExpr:
    """Graded product of two rational expressions in closed form.

    Works term pair by term pair; every pair must satisfy the distinctness
    precondition (all sums u_i + v_j different), otherwise
    DistinctnessViolation propagates and the caller can fall back to series
    expansion.
    """
    if e1.registry != e2.registry:
        raise ValueError("operands live over different variable registries")
    table = FormTable(e1.registry)
    terms = []
    for t1 in e1.terms:
        for t2 in e2.terms:
            terms.append(_odot_pair(e1.registry, table, e1.table.forms, t1, e2.table.forms, t2))
    return RationalExpr(e1.registry, table, RationalExpr._merged(terms))


def expand_to_series(expr: RationalExpr, trunc: int) -> Series:
    return expr.expand(trunc)


def permutation_form(registry: VariableRegistry, sigma) -> Series:
    """The degree-2 form sum_i z_i w_{sigma(i)} for a permutation of
    0..n-1 given as a tuple of images."""
    n = registry.pair_count
    sigma = tuple(sigma)
    if sorted(sigma) != list(range(n)):
        raise ValueError(f"{sigma} is not a permutation of 0..{n-1}")
    terms: dict = {}
    for i in range(n):
        e = [0] * registry.size
        e[2 * i] = 1
        e[2 * sigma[i] + 1] = 1
        terms[tuple(e)] = 1
    return Series(registry, 2, terms)


def identity_form(registry: VariableRegistry) -> Series:
    return permutation_form(registry, range(registry.pair_count))
