"""t-adic coefficient arithmetic and the quantitative convergence certificate.

Scalars are truncated Laurent series over F_{p^k}: a valuation, a unit digit
vector, and a count of trusted digits (None = exact: all further digits are
zero).  The norm is never materialized; |x| = rho^val for a formal
rho in (0,1), so every norm comparison is a valuation comparison.

The certificate machinery turns the growth constants (s_0, eta, c, delta_h,
c_n) into exact rational arithmetic, with the valuation scale W standing in
for the base gamma = rho^(-W).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import (
    DivisionByZero,
    PrecisionExhausted,
    UnsolvableRoot,
    ValidationError,
)
from .invariants import InvariantProfile, profile
from .normalizer import ConjugacyWitness, _Engine, verify_conjugacy
from .series import Germ1D, Series

_INF = math.inf


class LaurentScalar:
    """val + unit-digit vector + trusted digit count (None = exact)."""

    __slots__ = ("val", "unit", "prec")

    def __init__(self, val, unit, prec):
        self.val = val
        self.unit = unit
        self.prec = prec

    def __repr__(self):
        if self.val is _INF or self.val == _INF:
            return "<0>"
        if self.prec == 0:
            return f"<O(t^{self.val})>"
        tail = "" if self.prec is None else f"+O(t^{self.val + self.prec})"
        return f"<t^{self.val}*{list(self.unit)}{tail}>"


class LaurentDomain:
    """Coefficient domain F_q((t)) truncated to ``prec`` trusted t-digits."""

    def __init__(self, base_field, prec=32):
        self.base = base_field
        self.p = base_field.p
        self.prec = prec
        self.zero = LaurentScalar(_INF, (), None)
        self.one = LaurentScalar(0, (base_field.one,), None)

    # -- constructors -------------------------------------------------------

    def constant(self, code):
        if code == 0:
            return self.zero
        return LaurentScalar(0, (code,), None)

    def from_int(self, n):
        return self.constant(self.base.from_int(n))

    def t_power(self, v, code=None):
        code = self.base.one if code is None else code
        if code == 0:
            return self.zero
        return LaurentScalar(v, (code,), None)

    def make(self, val, digits, prec=None):
        return self._mk(val, list(digits), prec)

    def _mk(self, val, digits, prec):
        """Normalize: strip known-zero leading digits, cap stored digits."""
        if prec is not None:
            digits = digits[:prec]
        i = 0
        while i < len(digits) and digits[i] == 0:
            i += 1
        if i == len(digits):
            if prec is None:
                return self.zero
            if prec <= 0 or val + prec == _INF:
                return LaurentScalar(val, (), 0)
            # all trusted digits vanish: zero to precision val+prec
            return LaurentScalar(val + prec, (), 0)
        digits = digits[i:]
        val += i
        if prec is not None:
            prec -= i
        while digits and digits[-1] == 0:
            digits.pop()
        if prec is None and len(digits) > self.prec:
            digits = digits[: self.prec]
            prec = self.prec
            while digits and digits[-1] == 0:
                digits.pop()
        if prec is not None and prec > self.prec:
            prec = self.prec
            digits = digits[: prec]
        return LaurentScalar(val, tuple(digits), prec)

    # -- predicates ----------------------------------------------------------

    @staticmethod
    def _end(x):
        """First untrusted digit position (absolute); inf when exact."""
        return _INF if x.prec is None else x.val + x.prec

    def is_zero(self, x):
        """Exactly zero.  Zero-to-precision values are kept in sums."""
        return x.prec is None and not x.unit

    def is_zero_to_prec(self, x):
        """Cannot be distinguished from zero: exact zero or all trusted
        digits vanish."""
        return not x.unit

    def eq(self, x, y):
        return self.is_zero(self.sub(x, y))

    # -- ring ops ---------------------------------------------------------------

    def add(self, x, y):
        if self.is_zero(x):
            return y
        if self.is_zero(y):
            return x
        v = min(x.val, y.val)
        end = min(self._end(x), self._end(y))
        if end == _INF:
            ln = max(x.val + len(x.unit), y.val + len(y.unit)) - v
            prec = None
        else:
            ln = end - v
            prec = ln
            if ln <= 0:
                return LaurentScalar(end, (), 0)
            ln = min(ln, self.prec)
        add = self.base.add
        out = [0] * int(ln)
        for s in (x, y):
            base = s.val - v
            for i, dgt in enumerate(s.unit):
                idx = base + i
                if idx < ln and dgt:
                    out[idx] = add(out[idx], dgt)
        return self._mk(v, out, prec)

    def neg(self, x):
        if not x.unit:
            return x
        neg = self.base.neg
        return LaurentScalar(x.val, tuple(neg(d) for d in x.unit), x.prec)

    def sub(self, x, y):
        return self.add(x, self.neg(y))

    def mul(self, x, y):
        if self.is_zero(x) or self.is_zero(y):
            return self.zero
        if not x.unit or not y.unit:  # zero-to-precision factor
            return LaurentScalar(x.val + y.val, (), 0)
        v = x.val + y.val
        conv_len = len(x.unit) + len(y.unit) - 1
        if x.prec is None and y.prec is None:
            # the leading digit of a product never cancels, so capping the
            # exact convolution at the working precision is safe
            prec = None if conv_len <= self.prec else self.prec
        else:
            lx = _INF if x.prec is None else x.prec
            ly = _INF if y.prec is None else y.prec
            prec = min(int(min(lx, ly)), self.prec)
        cap = conv_len if prec is None else min(conv_len, prec)
        if len(x.unit) == 1 and len(y.unit) == 1:
            out = [self.base.mul(x.unit[0], y.unit[0])]
        else:
            mul, add = self.base.mul, self.base.add
            out = [0] * cap
            for i, a in enumerate(x.unit):
                if not a or i >= cap:
                    continue
                for j, b in enumerate(y.unit):
                    if i + j >= cap:
                        break
                    if b:
                        out[i + j] = add(out[i + j], mul(a, b))
        return self._mk(v, out, prec)

    def inv(self, x):
        if self.is_zero(x):
            raise DivisionByZero("inverse of 0 in the Laurent ring")
        if not x.unit:
            raise PrecisionExhausted(
                f"inverse of a value only known to be O(t^{x.val})")
        base = self.base
        if len(x.unit) == 1:
            return LaurentScalar(-x.val, (base.inv(x.unit[0]),), x.prec)
        ln = self.prec if x.prec is None else min(x.prec, self.prec)
        inv0 = base.inv(x.unit[0])
        out = [0] * ln
        out[0] = inv0
        for n in range(1, ln):
            acc = 0
            for j in range(1, min(n, len(x.unit) - 1) + 1):
                c = x.unit[j]
                if c:
                    acc = base.add(acc, base.mul(c, out[n - j]))
            out[n] = base.neg(base.mul(inv0, acc))
        return self._mk(-x.val, out, ln)

    def div(self, x, y):
        return self.mul(x, self.inv(y))

    def pow(self, x, e):
        if e < 0:
            return self.pow(self.inv(x), -e)
        r = self.one
        while e:
            if e & 1:
                r = self.mul(r, x)
            x = self.mul(x, x)
            e >>= 1
        return r

    # -- Frobenius ---------------------------------------------------------------

    def frob(self, x, m=1):
        if m == 0 or not x.unit:
            if not x.unit and not self.is_zero(x):
                return LaurentScalar(x.val * self.p ** m, (), 0)
            return x
        step = self.p ** m
        frob = self.base.frob
        ln = (len(x.unit) - 1) * step + 1
        prec = None
        if x.prec is not None:
            prec = x.prec * step
        out = [0] * ln
        for i, d in enumerate(x.unit):
            if d:
                out[i * step] = frob(d, m)
        return self._mk(x.val * step, out, prec)

    def frob_root(self, x, m=1):
        if m == 0 or self.is_zero(x):
            return x
        if not x.unit:
            raise PrecisionExhausted(
                f"p^{m}-th root of a value only known to be O(t^{x.val})")
        step = self.p ** m
        if x.val % step:
            raise UnsolvableRoot(
                f"t-valuation {x.val} is not divisible by p^{m}")
        froot = self.base.frob_root
        out = []
        for i, d in enumerate(x.unit):
            if i % step:
                if d:
                    raise UnsolvableRoot(
                        f"digit at t^{x.val + i} obstructs the p^{m}-th root")
            else:
                out.append(froot(d, m))
        prec = None
        if x.prec is not None:
            prec = (x.prec + step - 1) // step
            out = out[:prec]
        return self._mk(x.val // step, out, prec)

    # -- lifting -------------------------------------------------------------------

    def lift_series(self, s):
        """A finite-field series lifted to constant Laurent coefficients."""
        return Series(self, [self.constant(c) for c in s.coeffs], s.trunc)

    def lift_germ(self, f):
        return Germ1D(self, self.lift_series(f.series))


def tval(x):
    """The t-adic valuation (inf for exact zero; the bound for values that
    vanish to precision)."""
    return x.val


def laurent_ops(dom, x, y, op):
    if op == "add":
        return dom.add(x, y)
    if op == "mul":
        return dom.mul(x, y)
    if op == "inv":
        return dom.inv(x)
    raise ValueError(f"unknown op {op!r}")


# ---------------------------------------------------------------------------
# conjugacy to the truncation
# ---------------------------------------------------------------------------

def truncation_target(prof: InvariantProfile) -> int:
    """Largest kept x-order of the target truncation."""
    if prof.e < 1:
        raise ValidationError("truncation target needs e >= 1")
    p = prof.p
    return p ** prof.m * (prof.d + (prof.r[0] * p) // (p - 1) + 1) - 1


def conjugacy_to_truncation(f: Germ1D, order, verify_order=None):
    """Solve Phi o f = f~ o Phi where f~ is the truncation of f at the
    certified order; phi_n is computed for n <= ``order``.

    Low-order unknowns go through the fiber recursion with the target
    coefficients prescribed; high-order ones reduce to one division by the
    unit r_0 * eps_{r_0} (times a p^m-th root when m > 0, which may fail
    over the imperfect Laurent ring: UnsolvableRoot)."""
    dom = f.dom
    prof = profile(f)
    if prof.e < 1:
        raise ValidationError("the certificate path needs e >= 1")
    p, m, d = prof.p, prof.m, prof.d
    g, _ = f.split()
    if not dom.is_zero(dom.sub(g.coeffs[d], dom.one)):
        raise ValidationError("germ must be unit-normalized (eps_0 = 1)")
    step = p ** m
    j_hi = order
    n_hi = prof.r[0] + j_hi
    src = f.series.extended(step * (d + n_hi))
    g, _ = Germ1D(dom, src).split()
    unit = g.coeffs[d:]
    for n, c in enumerate(unit):
        if c.unit and c.val < 0:
            raise ValidationError(
                f"coefficient at index {n} has negative valuation {c.val}")
    x_star = truncation_target(prof)
    n_tilde = x_star // step - d
    target_unit = list(unit[: n_tilde + 1])
    eng = _Engine(dom, prof, unit, j_hi, mode="prescribed",
                  target_unit=target_unit)
    eng.solve()
    phi = Series(dom, list(eng.phis), j_hi)
    vo = verify_order
    if vo is None:
        vo = min(step * (d + n_hi), max(x_star + 2 * step, 48))
    tgt = Series(dom, [dom.zero] * (x_star + 1), x_star)
    for n, c in enumerate(target_unit):
        idx = step * (d + n)
        if idx <= x_star:
            tgt.coeffs[idx] = c
    report = verify_conjugacy(Germ1D(dom, src), Germ1D(dom, tgt.extended(vo)),
                              phi.shift(1), vo)
    if not report.ok:
        raise UnsolvableRoot(
            f"prescribed-target witness fails at degree "
            f"{report.first_disagreement}")
    return ConjugacyWitness(phi, dom.one, report.checked_order,
                            eng.transcript)


# ---------------------------------------------------------------------------
# the growth certificate
# ---------------------------------------------------------------------------

@dataclass
class GrowthCertificate:
    p: int
    m: int
    r0: int
    s0: int
    scale: int            # W: the valuation scale standing in for gamma
    eta: Fraction
    c: Fraction

    def s_h(self, h):
        p, r0 = self.p, self.r0
        return self.s0 * p ** h - r0 * (p ** h - 1) // (p - 1)

    def k_h(self, h):
        return self.p ** h * (self.s0 * (self.p - 1) - self.r0)

    def t_h(self, h):
        t = Fraction(self.s0)
        for _ in range(h):
            t = self.p * t + self.eta
        return t

    def delta_h(self, h):
        return Fraction(self.c - 1 - self.eta, self.k_h(h))

    def _locate(self, n):
        h = 0
        while self.s_h(h + 1) <= n:
            h += 1
        return h, n - self.s_h(h)

    def c_n_recursive(self, n):
        """t_h + k (c - delta_h) from the defining recurrences."""
        if n <= self.s0:
            return Fraction(n)
        h, k = self._locate(n)
        return self.t_h(h) + k * (self.c - self.delta_h(h))

    def c_n_closed(self, n):
        """s_0 + c (n - s_0) - k delta_h: the closed form."""
        if n <= self.s0:
            return Fraction(n)
        h, k = self._locate(n)
        return self.s0 + self.c * (n - self.s0) - k * self.delta_h(h)

    def linear_bound(self):
        """(A, B) with scale*c_n <= A + B*n for all n."""
        return (self.scale * self.s0 * (1 - self.c), self.scale * self.c)

    def to_dict(self):
        return {"s0": self.s0, "W": self.scale,
                "eta": [self.eta.numerator, self.eta.denominator],
                "c": [self.c.numerator, self.c.denominator]}


def certificate(prof: InvariantProfile, phi_prefix, v) -> GrowthCertificate:
    """Growth constants from the profile, the first s_0 witness coefficients
    and v = val(eps_{r_0}).  The scale W is raised until eta < c - 1."""
    if prof.e < 1:
        raise ValidationError("certificate needs e >= 1")
    if v < 0:
        raise ValidationError("certificate needs val(eps_{r_0}) >= 0")
    p, m, r0 = prof.p, prof.m, prof.r[0]
    s0 = (p * r0) // (p - 1) + 1 - r0
    assert s0 >= 1
    assert s0 * (p - 1) - r0 >= 1
    scale = 1
    for n in range(1, s0 + 1):
        if n - 1 < len(phi_prefix):
            val = tval(phi_prefix[n - 1])
            if val is not _INF and val < 0:
                scale = max(scale, (-val + n - 1) // n)  # ceil(-val / n)
    while True:
        eta = Fraction(v, scale * p ** m)
        c = Fraction(s0 * (p - 1) + eta, s0 * (p - 1) - r0)
        if eta < c - 1:
            break
        scale += 1
    return GrowthCertificate(p, m, r0, s0, scale, eta, c)


@dataclass
class GrowthReport:
    ok: bool
    checked: int
    violations: list
    max_ratio: Fraction
    bound: tuple

    def to_dict(self):
        return {"ok": self.ok, "checked": self.checked,
                "violations": self.violations,
                "max_ratio": [self.max_ratio.numerator,
                              self.max_ratio.denominator],
                "bound": [str(self.bound[0]), str(self.bound[1])]}


def check_growth(witness: ConjugacyWitness, cert: GrowthCertificate):
    """Assert -val(phi_n) <= W * c_n for every computed coefficient."""
    phi = witness.phi
    violations = []
    max_ratio = Fraction(0)
    for n in range(1, phi.trunc + 1):
        val = tval(phi.coeffs[n])
        if val is _INF or val == _INF:
            continue
        need = cert.scale * cert.c_n_closed(n)
        ratio = Fraction(-val, 1) / need
        if ratio > max_ratio:
            max_ratio = ratio
        if -val > need:
            violations.append((n, val, need))
    return GrowthReport(not violations, phi.trunc, violations, max_ratio,
                        cert.linear_bound())
