"""Exact sparse power series truncated in total degree.

Every series lives over a fixed finite variable registry and is supported on
total degrees divisible by the registry's modulus N (N = 2 for the z/w
generating functions, N = 1 for ordinary series).  Coefficients are exact
Python ints or Fractions; floats are rejected.  All operations are pure and
truncate to the smaller degree bound of their operands.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import product

Exponents = tuple[int, ...]


class RegistryMismatch(ValueError):
    """Operands were built over different variable registries."""


def _norm_coeff(c):
    """Normalize an exact coefficient; integral Fractions collapse to int."""
    if isinstance(c, Fraction):
        return c.numerator if c.denominator == 1 else c
    if isinstance(c, int):
        return c
    raise TypeError(f"coefficient must be int or Fraction, got {type(c).__name__}")


@dataclass(frozen=True)
class VariableRegistry:
    """Ordered variable names together with the homogeneity modulus N.

    A series over a registry with modulus N may only carry terms whose total
    degree is a multiple of N.
    """

    names: tuple[str, ...]
    modulus: int = 2

    def __post_init__(self):
        if not self.names or len(set(self.names)) != len(self.names):
            raise ValueError("variable names must be nonempty and distinct")
        if not all(isinstance(s, str) and s for s in self.names):
            raise ValueError("variable names must be nonempty strings")
        if self.modulus < 1:
            raise ValueError("modulus must be a positive integer")

    @classmethod
    def zw_pairs(cls, n: int) -> "VariableRegistry":
        """The registry z1, w1, ..., zn, wn with modulus 2."""
        if n < 1:
            raise ValueError("need at least one variable pair")
        names: list[str] = []
        for i in range(1, n + 1):
            names.append(f"z{i}")
            names.append(f"w{i}")
        return cls(tuple(names), 2)

    @cached_property
    def _positions(self) -> dict[str, int]:
        return {name: i for i, name in enumerate(self.names)}

    @property
    def size(self) -> int:
        return len(self.names)

    @property
    def pair_count(self) -> int:
        if self.size % 2 != 0:
            raise ValueError("registry is not made of z/w pairs")
        return self.size // 2

    def index(self, name: str) -> int:
        try:
            return self._positions[name]
        except KeyError:
            raise KeyError(f"unknown variable {name!r}") from None


class Series:
    """Truncated multivariate series with exact rational coefficients.

    ``terms`` maps exponent tuples to nonzero coefficients.  Invariants:
    every tuple has the registry's length with entries >= 0, every stored
    total degree is <= trunc and divisible by the registry modulus.  Terms
    above the truncation bound are dropped silently (that is what the bound
    means); a degree not divisible by N is an error, not a truncation.
    """

    __slots__ = ("registry", "trunc", "terms")

    def __init__(self, registry: VariableRegistry, trunc: int, terms=(), _checked=False):
        if trunc < 0:
            raise ValueError("truncation bound must be >= 0")
        self.registry = registry
        self.trunc = trunc
        if _checked:
            self.terms = terms
            return
        size = registry.size
        mod = registry.modulus
        clean: dict[Exponents, object] = {}
        items = terms.items() if hasattr(terms, "items") else terms
        for exps, c in items:
            exps = tuple(exps)
            if len(exps) != size:
                raise ValueError(f"exponent tuple {exps} does not match registry size {size}")
            if any(not isinstance(e, int) or e < 0 for e in exps):
                raise ValueError(f"exponents must be nonnegative integers, got {exps}")
            c = _norm_coeff(c)
            if c == 0:
                continue
            deg = sum(exps)
            if deg % mod != 0:
                raise ValueError(
                    f"term of degree {deg} violates the degree-modulus-{mod} support constraint"
                )
            if deg > trunc:
                continue
            clean[exps] = clean.get(exps, 0) + c
            if clean[exps] == 0:
                del clean[exps]
        self.terms = clean

    # -- basics ------------------------------------------------------------

    def __setattr__(self, name, value):
        if hasattr(self, "terms"):
            raise AttributeError("Series is immutable")
        object.__setattr__(self, name, value)

    def _require_same(self, other: "Series") -> None:
        if self.registry != other.registry:
            raise RegistryMismatch("operands live over different variable registries")

    def is_zero(self) -> bool:
        return not self.terms

    def coefficient(self, exps) -> object:
        exps = tuple(exps)
        if len(exps) != self.registry.size:
            raise ValueError("exponent tuple does not match registry size")
        return self.terms.get(exps, 0)

    def sorted_terms(self) -> list[tuple[Exponents, object]]:
        """Terms in the canonical order: by total degree, then by exponent
        tuple with earlier registry variables first."""
        return sorted(
            self.terms.items(),
            key=lambda kv: (sum(kv[0]), tuple(-e for e in kv[0])),
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, Series):
            return NotImplemented
        return (
            self.registry == other.registry
            and self.trunc == other.trunc
            and self.terms == other.terms
        )

    __hash__ = None

    def __repr__(self) -> str:
        return f"Series({len(self.terms)} terms, vars={len(self.registry.names)}, D={self.trunc})"

    # -- constructors --------------------------------------------------------

    @classmethod
    def zero(cls, registry: VariableRegistry, trunc: int) -> "Series":
        return cls(registry, trunc, {}, _checked=True)

    @classmethod
    def one(cls, registry: VariableRegistry, trunc: int) -> "Series":
        return cls.monomial(registry, trunc, (0,) * registry.size)

    @classmethod
    def monomial(cls, registry: VariableRegistry, trunc: int, exps, coeff=1) -> "Series":
        return cls(registry, trunc, {tuple(exps): coeff})

    # -- ring operations -----------------------------------------------------

    def __add__(self, other: "Series") -> "Series":
        if not isinstance(other, Series):
            return NotImplemented
        self._require_same(other)
        D = min(self.trunc, other.trunc)
        out = {e: c for e, c in self.terms.items() if sum(e) <= D}
        for e, c in other.terms.items():
            if sum(e) > D:
                continue
            v = out.get(e, 0) + c
            if v:
                out[e] = v
            elif e in out:
                del out[e]
        return Series(self.registry, D, out, _checked=True)

    def __neg__(self) -> "Series":
        return Series(self.registry, self.trunc, {e: -c for e, c in self.terms.items()}, _checked=True)

    def __sub__(self, other: "Series") -> "Series":
        if not isinstance(other, Series):
            return NotImplemented
        return self + (-other)

    def scale(self, c) -> "Series":
        c = _norm_coeff(c)
        if c == 0:
            return Series.zero(self.registry, self.trunc)
        return Series(self.registry, self.trunc, {e: v * c for e, v in self.terms.items()}, _checked=True)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if not isinstance(other, Series):
            return NotImplemented
        self._require_same(other)
        D = min(self.trunc, other.trunc)
        left = [(e, sum(e), c) for e, c in self.terms.items() if sum(e) <= D]
        right = sorted(
            ((e, sum(e), c) for e, c in other.terms.items() if sum(e) <= D),
            key=lambda t: t[1],
        )
        out: dict[Exponents, object] = {}
        for e1, d1, c1 in left:
            lim = D - d1
            for e2, d2, c2 in right:
                if d2 > lim:
                    break
                key = tuple(a + b for a, b in zip(e1, e2))
                v = out.get(key, 0) + c1 * c2
                if v:
                    out[key] = v
                elif key in out:
                    del out[key]
        return Series(self.registry, D, out, _checked=True)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    # -- graded structure ------------------------------------------------------

    def homogeneous_part(self, k: int) -> "Series":
        """The slice of total degree N*k (zero series when N*k > trunc)."""
        if k < 0:
            raise ValueError("part index must be >= 0")
        d = k * self.registry.modulus
        out = {e: c for e, c in self.terms.items() if sum(e) == d}
        return Series(self.registry, self.trunc, out, _checked=True)

    def max_part_index(self) -> int:
        return self.trunc // self.registry.modulus

    def odot(self, other: "Series") -> "Series":
        """Graded product: sum over k,l of C(k+l,k) f_(k) g_(l).

        Equivalently an ordinary product where a term pair of levels (k, l)
        picks up the binomial weight C(k+l, k).
        """
        if not isinstance(other, Series):
            raise TypeError("odot needs a Series operand")
        self._require_same(other)
        N = self.registry.modulus
        D = min(self.trunc, other.trunc)
        left = [(e, sum(e), c) for e, c in self.terms.items() if sum(e) <= D]
        right = sorted(
            ((e, sum(e), c) for e, c in other.terms.items() if sum(e) <= D),
            key=lambda t: t[1],
        )
        out: dict[Exponents, object] = {}
        for e1, d1, c1 in left:
            lim = D - d1
            k1 = d1 // N
            for e2, d2, c2 in right:
                if d2 > lim:
                    break
                w = math.comb(k1 + d2 // N, k1)
                key = tuple(a + b for a, b in zip(e1, e2))
                v = out.get(key, 0) + w * c1 * c2
                if v:
                    out[key] = v
                elif key in out:
                    del out[key]
        return Series(self.registry, D, out, _checked=True)

    # -- structural helpers ------------------------------------------------------

    def with_trunc(self, trunc: int) -> "Series":
        """Re-bound the series.  Raising the bound asserts the caller knows
        the series is an exact polynomial (nothing was ever dropped)."""
        out = {e: c for e, c in self.terms.items() if sum(e) <= trunc}
        return Series(self.registry, trunc, out, _checked=True)

    def rename(self, target: VariableRegistry, mapping: dict[str, str]) -> "Series":
        """Inject the series into another registry by renaming variables.

        ``mapping`` sends each source name to a distinct target name; the
        degree structure is untouched, so both registries must share N.
        """
        if self.registry.modulus != target.modulus:
            raise ValueError("variable renaming cannot change the degree modulus")
        if set(mapping) != set(self.registry.names):
            raise ValueError("mapping must cover exactly the source variables")
        images = list(mapping.values())
        if len(set(images)) != len(images):
            raise ValueError("mapping must be injective")
        where = [target.index(mapping[name]) for name in self.registry.names]
        size = target.size
        out: dict[Exponents, object] = {}
        for e, c in self.terms.items():
            t = [0] * size
            for pos, exp in zip(where, e):
                t[pos] = exp
            out[tuple(t)] = c
        return Series(target, self.trunc, out, _checked=True)

    def shift(self, exps, coeff=1) -> "Series":
        """Multiply by a single monomial (terms pushed past trunc drop off)."""
        exps = tuple(exps)
        if len(exps) != self.registry.size or any(e < 0 for e in exps):
            raise ValueError("bad monomial exponent tuple")
        d = sum(exps)
        if d % self.registry.modulus != 0:
            raise ValueError("monomial degree breaks the support constraint")
        coeff = _norm_coeff(coeff)
        out: dict[Exponents, object] = {}
        for e, c in self.terms.items():
            if sum(e) + d > self.trunc:
                continue
            out[tuple(a + b for a, b in zip(e, exps))] = c * coeff
        return Series(self.registry, self.trunc, out, _checked=True)

    # -- serialization ------------------------------------------------------------

    def to_text(self) -> str:
        """Stable text form: header comments, then one 'num/den monomial'
        line per term in canonical order."""
        lines = [
            "# vars: " + " ".join(self.registry.names),
            f"# N: {self.registry.modulus}",
            f"# D: {self.trunc}",
        ]
        for exps, c in self.sorted_terms():
            f = Fraction(c)
            mono = " ".join(
                f"{name}^{e}" for name, e in zip(self.registry.names, exps) if e
            )
            lines.append(f"{f.numerator}/{f.denominator} {mono}".rstrip())
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Series":
        names: tuple[str, ...] | None = None
        modulus = 2
        trunc: int | None = None
        terms: dict[Exponents, object] = {}
        for raw in text.splitlines():
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if body.startswith("vars:"):
                    names = tuple(body[5:].split())
                elif body.startswith("N:"):
                    modulus = int(body[2:])
                elif body.startswith("D:"):
                    trunc = int(body[2:])
                continue
            if names is None or trunc is None:
                raise ValueError("term line before '# vars:'/'# D:' headers")
            parts = line.split()
            num_s, _, den_s = parts[0].partition("/")
            coeff = Fraction(int(num_s), int(den_s) if den_s else 1)
            exps = [0] * len(names)
            for tok in parts[1:]:
                name, _, pow_s = tok.partition("^")
                exps[names.index(name)] = int(pow_s) if pow_s else 1
            key = tuple(exps)
            terms[key] = terms.get(key, 0) + coeff
        if names is None or trunc is None:
            raise ValueError("missing '# vars:' or '# D:' header")
        return cls(VariableRegistry(names, modulus), trunc, terms)

    def to_json_dict(self) -> dict:
        terms = []
        for exps, c in self.sorted_terms():
            f = Fraction(c)
            terms.append({"exps": list(exps), "num": f.numerator, "den": f.denominator})
        return {
            "vars": list(self.registry.names),
            "N": self.registry.modulus,
            "D": self.trunc,
            "terms": terms,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "Series":
        registry = VariableRegistry(tuple(data["vars"]), int(data.get("N", 2)))
        terms = {
            tuple(t["exps"]): Fraction(t["num"], t["den"]) for t in data["terms"]
        }
        return cls(registry, int(data["D"]), terms)


# -- free functions over Series ---------------------------------------------------


def homogeneous_part(f: Series, k: int) -> Series:
    return f.homogeneous_part(k)


def odot(f: Series, g: Series) -> Series:
    return f.odot(g)


def odot_many(fs) -> Series:
    """Graded product of several series, folded left to right."""
    fs = list(fs)
    if not fs:
        raise ValueError("odot_many needs at least one operand")
    acc = fs[0]
    for f in fs[1:]:
        acc = acc.odot(f)
    return acc


def odot_many_direct(fs) -> Series:
    """Graded product by the direct multinomial formula.

    Slower than the fold; kept as an independent route so the two can be
    compared term by term.
    """
    fs = list(fs)
    if not fs:
        raise ValueError("odot_many_direct needs at least one operand")
    registry = fs[0].registry
    for f in fs[1:]:
        fs[0]._require_same(f)
    N = registry.modulus
    D = min(f.trunc for f in fs)
    out: dict[Exponents, object] = {}
    term_lists = [
        [(e, sum(e), c) for e, c in f.terms.items() if sum(e) <= D] for f in fs
    ]
    for combo in product(*term_lists):
        total = sum(t[1] for t in combo)
        if total > D:
            continue
        levels = [t[1] // N for t in combo]
        w = math.factorial(sum(levels))
        for lv in levels:
            w //= math.factorial(lv)
        coeff = w
        for t in combo:
            coeff = coeff * t[2]
        key = tuple(sum(es) for es in zip(*(t[0] for t in combo)))
        v = out.get(key, 0) + coeff
        if v:
            out[key] = v
        elif key in out:
            del out[key]
    return Series(registry, D, out, _checked=True)


def geometric(form: Series, trunc: int) -> Series:
    """1/(1 - form) truncated: 1 + form + form^2 + ...

    ``form`` must have zero constant term, otherwise the expansion is not a
    well-defined truncated series.  The form is taken as an exact polynomial:
    its own truncation bound is re-set to ``trunc`` before expanding.
    """
    if form.coefficient((0,) * form.registry.size) != 0:
        raise ValueError("geometric expansion needs a form with zero constant term")
    f = form.with_trunc(trunc)
    result = Series.one(form.registry, f.trunc)
    power = result
    while True:
        power = power * f
        if power.is_zero():
            break
        result = result + power
    return result


# -- the q-side: exponential rearrangement ------------------------------------------


class QSeries:
    """Polynomial in an auxiliary variable q whose q^k coefficient is a
    homogeneous series of total degree N*k."""

    __slots__ = ("registry", "trunc", "order", "parts")

    def __init__(self, registry: VariableRegistry, trunc: int, order: int, parts, _checked=False):
        if order < 0:
            raise ValueError("order must be >= 0")
        self.registry = registry
        self.trunc = trunc
        self.order = order
        if _checked:
            self.parts = parts
            return
        clean: dict[int, Series] = {}
        for k, part in dict(parts).items():
            if not 0 <= k <= order:
                raise ValueError(f"part index {k} outside 0..{order}")
            if part.registry != registry:
                raise RegistryMismatch("part registry differs from the q-series registry")
            d = k * registry.modulus
            if any(sum(e) != d for e in part.terms):
                raise ValueError(f"part {k} is not homogeneous of degree {d}")
            if not part.is_zero():
                clean[k] = part.with_trunc(trunc)
        self.parts = clean

    def __setattr__(self, name, value):
        if hasattr(self, "parts"):
            raise AttributeError("QSeries is immutable")
        object.__setattr__(self, name, value)

    def part(self, k: int) -> Series:
        if k in self.parts:
            return self.parts[k]
        return Series.zero(self.registry, self.trunc)

    def __eq__(self, other) -> bool:
        if not isinstance(other, QSeries):
            return NotImplemented
        return (
            self.registry == other.registry
            and self.trunc == other.trunc
            and self.order == other.order
            and self.parts == other.parts
        )

    __hash__ = None

    def __repr__(self) -> str:
        return f"QSeries(order={self.order}, parts={sorted(self.parts)})"

    def __mul__(self, other):
        if not isinstance(other, QSeries):
            return NotImplemented
        return qseries_mul(self, other)

    def to_text(self) -> str:
        lines = []
        for k in sorted(self.parts):
            lines.append(f"q^{k}:")
            for exps, c in self.parts[k].sorted_terms():
                f = Fraction(c)
                mono = " ".join(
                    f"{name}^{e}" for name, e in zip(self.registry.names, exps) if e
                )
                lines.append(f"  {f.numerator}/{f.denominator} {mono}".rstrip())
        return "\n".join(lines) + "\n"

    def to_json_dict(self) -> dict:
        return {
            "vars": list(self.registry.names),
            "N": self.registry.modulus,
            "D": self.trunc,
            "order": self.order,
            "parts": {str(k): self.parts[k].to_json_dict() for k in sorted(self.parts)},
        }


def e_transform(f: Series) -> QSeries:
    """Rearrange f into sum_k f_(k) q^k / k! (the exponential transform)."""
    N = f.registry.modulus
    order = f.trunc // N
    parts: dict[int, Series] = {}
    for k in range(order + 1):
        p = f.homogeneous_part(k)
        if not p.is_zero():
            parts[k] = p.scale(Fraction(1, math.factorial(k)))
    return QSeries(f.registry, f.trunc, order, parts, _checked=True)


def e_inverse(h: QSeries) -> Series:
    """Undo e_transform: replace q^k/k! by 1, i.e. sum k! * part_k."""
    acc = Series.zero(h.registry, h.trunc)
    for k, part in h.parts.items():
        acc = acc + part.scale(math.factorial(k))
    return acc


def qseries_mul(a: QSeries, b: QSeries) -> QSeries:
    """Cauchy product in q; the x-side products truncate as usual."""
    if a.registry != b.registry:
        raise RegistryMismatch("operands live over different variable registries")
    trunc = min(a.trunc, b.trunc)
    order = min(a.order, b.order)
    parts: dict[int, Series] = {}
    for i, pa in a.parts.items():
        for j, pb in b.parts.items():
            r = i + j
            if r > order or r * a.registry.modulus > trunc:
                continue
            prod = pa.with_trunc(trunc) * pb.with_trunc(trunc)
            if prod.is_zero():
                continue
            parts[r] = parts[r] + prod if r in parts else prod
    parts = {k: p for k, p in parts.items() if not p.is_zero()}
    return QSeries(a.registry, trunc, order, parts, _checked=True)
