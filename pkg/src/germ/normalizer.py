"""The classification engine for one-dimensional superattracting germs.

Given a germ f = g(x^(p^m)) with g(y) = y^d (1 + eps(y)), eps_0 = 1, the
conjugacy relation between f and a candidate target splits per y-degree n
into one coefficient equation.  Equations are solved fiber by fiber along
the index map J: the fiber of j fixes the witness coefficient phi_j (from
the chosen representative N(j), whose target coefficient is set to zero)
and the target coefficients at the remaining fiber members.

The unknown phi_j enters the degree-n equation only through an additive
polynomial sum_k R_k z^(p^(m+k)) - L z, where the R_k come from the
invariant positions r_k and L is the (exactly computable) linear
coefficient on the left-hand side.  Everything else is evaluated
numerically from incrementally maintained truncated series:

- the left side is linear in the phi's: L_partial = sum phi_h (1+eps) w^h
  with w = y^d (1+eps), extended one product a time;
- the right side needs single coefficients of (T^m phi)^(d+i) for the
  finitely many i with nonzero target coefficient; powers are reduced along
  base-p digits of the exponent to cached "chains" whose entries are only
  memoised once they no longer depend on unassigned phi's.

Setting unassigned coefficients to zero during evaluation is sound: the
dependence of each equation on not-yet-fixed unknowns other than phi_j is
identically zero, which the engine also asserts where cheap.
"""

from __future__ import annotations

import math
from bisect import insort
from dataclasses import dataclass, field as dc_field

from .errors import (
    InsufficientPrecision,
    NoRootInField,
    NotCoprime,
    ShapeViolation,
    UnassignedDependency,
    UnsolvableRoot,
    ValidationError,
)
from .fields import Field, FieldElement, poly_roots
from .invariants import (
    InvariantProfile,
    choice_bound,
    fiber,
    jays,
    n_doubleprime,
    n_prime,
    profile,
)
from .series import Germ1D, Series, binomial_pow, nu_p, revert


class _NeedExtension(Exception):
    def __init__(self, new_field):
        self.field = new_field


@dataclass
class NormalForm:
    """Target germ (x^(p^m))^d * a(x^(p^m)) satisfying the four support
    conditions for the chosen representative rule."""
    m: int
    d: int
    e: int
    r: tuple
    a: list          # raw domain coefficients a_0..deg(a)
    dom: object
    choice: str
    nj_table: dict | None = None

    @property
    def b(self):
        """Coefficient at the separable invariant position r_0."""
        return self.a[self.r[0]] if self.r[0] < len(self.a) else self.dom.zero

    def germ(self, trunc):
        dom = self.dom
        step = dom.p ** self.m
        s = Series.zeros(dom, trunc)
        for n, c in enumerate(self.a):
            idx = step * (self.d + n)
            if idx <= trunc:
                s.coeffs[idx] = c
        return Germ1D(dom, s)

    def a_dict(self):
        return {n: c for n, c in enumerate(self.a) if not self.dom.is_zero(c)}


@dataclass
class ConjugacyWitness:
    """Phi(x) = x*phi(x) with phi(0) = 1, conjugating the (normalized) source
    germ onto the target; composing with x -> linear^-1 * x first handles an
    unnormalized source."""
    phi: Series
    linear: object
    verified_order: int
    transcript: list = dc_field(default_factory=list)

    def phi_series(self):
        """Phi = x*phi(x) as a plain series."""
        return self.phi.shift(1)


@dataclass
class ConjReport:
    ok: bool
    checked_order: int
    first_disagreement: int | None


# ---------------------------------------------------------------------------
# the solver engine
# ---------------------------------------------------------------------------

class _Engine:
    def __init__(self, dom, prof, eps_unit, j_hi, *, mode="normal",
                 nj_rule="ndoubleprime", nj_table=None, target_unit=None,
                 allow_extension=True, seed=0, prefix=()):
        self.dom = dom
        self.p = dom.p
        self.prof = prof
        self.m, self.d, self.e, self.r = prof.m, prof.d, prof.e, prof.r
        self.j_hi = j_hi
        self.n_hi = prof.r[0] + j_hi
        n_hi = self.n_hi
        self.eps = list(eps_unit[: n_hi + 1])
        self.eps += [dom.zero] * (n_hi + 1 - len(self.eps))
        self.mode = mode
        self.nj_rule = nj_rule
        self.nj_table = nj_table
        self.allow_extension = allow_extension
        self.seed = seed
        self.prefix = tuple(prefix)
        self.choice_points = []
        self.transcript = []

        self.phis = [dom.one]
        self.frontier = 0
        self.wlist = [list(self.eps)]       # W_h = (1+eps) * w^h, w = y^d(1+eps)
        self.lhs_acc = list(self.eps)       # sum of phi_h W_h over assigned h
        self.eps_t = {}
        self.supp = []                      # (i, step, M, tau) with eps_t[i] != 0
        self.twistpow = {}                  # tau -> [None, psi, psi^2, ...]
        self.chains = {}                    # (tau, M) -> memoised prefix

        # slot bases: the distinct invariant positions, with the multiplier
        # of the unknown's Frobenius power they inject into the right side
        self.slot_bases = []
        for i0 in sorted(set(self.r)):
            kappa = int(nu_p(self.p, self.d + i0))
            mult = ((self.d + i0) // self.p ** kappa) % self.p
            self.slot_bases.append((i0, kappa, mult))

        if mode == "prescribed":
            if target_unit is None:
                raise ValueError("prescribed mode needs the target unit part")
            for i, v in enumerate(target_unit[: n_hi + 1]):
                if not dom.is_zero(v):
                    self._register_eps(i, v, record=False)

    # -- bookkeeping ---------------------------------------------------------

    def _take_choice(self, count):
        pos = len(self.choice_points)
        self.choice_points.append(count)
        idx = self.prefix[pos] if pos < len(self.prefix) else 0
        if idx >= count:
            raise ValueError("choice prefix out of range")
        return idx

    def _register_eps(self, i, value, record=True):
        self.eps_t[i] = value
        if not self.dom.is_zero(value):
            kappa = int(nu_p(self.p, self.d + i))
            step = self.p ** kappa
            insort(self.supp, (i, step, (self.d + i) // step, self.m + kappa))
        if record:
            self.transcript.append(
                {"kind": "eps", "n": i, "value": value})

    # -- left-hand side --------------------------------------------------------

    def _W(self, h):
        dom, d, n_hi = self.dom, self.d, self.n_hi
        add, mul, zero = dom.add, dom.mul, dom.is_zero
        u = self.eps
        while len(self.wlist) <= h:
            hh = len(self.wlist)
            prev = self.wlist[-1]
            out = [dom.zero] * (n_hi + 1)
            for i in range(d * (hh - 1), n_hi + 1 - d):
                a = prev[i]
                if zero(a):
                    continue
                for n in range(i + d, n_hi + 1):
                    b = u[n - d - i]
                    if not zero(b):
                        out[n] = add(out[n], mul(a, b))
            self.wlist.append(out)
        return self.wlist[h]

    def _lhs_pieces(self, n, j):
        """(known part of lhs_n, coefficient of the unknown phi_j in lhs_n)."""
        dom = self.dom
        zl = dom.zero
        if self.d * j <= n:
            zl = self._W(j)[n]
        for h in range(j + 1, n // self.d + 1):
            if not dom.is_zero(self._W(h)[n]):
                raise UnassignedDependency(
                    f"lhs at degree {n} touches phi_{h} > phi_{j}")
        return self.lhs_acc[n], zl

    def _lhs_full(self, n):
        """lhs_n with every phi up to the frontier assigned; asserts that no
        later phi can enter."""
        dom = self.dom
        for h in range(self.frontier + 1, n // self.d + 1):
            if not dom.is_zero(self._W(h)[n]):
                raise UnassignedDependency(
                    f"lhs at degree {n} touches unassigned phi_{h}")
        return self.lhs_acc[n]

    # -- right-hand side ---------------------------------------------------------

    def _twist_family(self, tau):
        fam = self.twistpow.get(tau)
        if fam is not None:
            return fam
        dom, n_hi = self.dom, self.n_hi
        psi = [dom.zero] * (n_hi + 1)
        frob = dom.frob
        for h, v in enumerate(self.phis):
            psi[h] = frob(v, tau)
        fam = [None, psi]
        add, mul, zero = dom.add, dom.mul, dom.is_zero
        for _ in range(2, self.p):
            prev = fam[-1]
            out = [dom.zero] * (n_hi + 1)
            for i, a in enumerate(prev):
                if zero(a):
                    continue
                for jdx in range(0, n_hi + 1 - i):
                    b = psi[jdx]
                    if not zero(b):
                        out[i + jdx] = add(out[i + jdx], mul(a, b))
            fam.append(out)
        self.twistpow[tau] = fam
        return fam

    def _final_cap(self, tau, mexp):
        if mexp % self.p:
            return self.frontier
        return self.p * self._final_cap(tau + 1, mexp // self.p) + self.p - 1

    def _chain_coef(self, tau, mexp, l):
        """Coefficient l of (T^tau phi)^mexp, unassigned phi's read as zero."""
        dom = self.dom
        if l < 0 or l > self.n_hi:
            return dom.zero
        if mexp == 0:
            return dom.one if l == 0 else dom.zero
        if mexp < self.p:
            return self._twist_family(tau)[mexp][l]
        if mexp % self.p == 0:
            if l % self.p:
                return dom.zero
            return self._chain_coef(tau + 1, mexp // self.p, l // self.p)
        key = (tau, mexp)
        vals = self.chains.get(key)
        if vals is None:
            vals = []
            self.chains[key] = vals
        if l < len(vals):
            return vals[l]
        cap = min(l, self._final_cap(tau, mexp))
        while len(vals) <= cap:
            vals.append(self._chain_compute(tau, mexp, len(vals)))
        if l < len(vals):
            return vals[l]
        return self._chain_compute(tau, mexp, l)  # transient: not yet final

    def _chain_compute(self, tau, mexp, l):
        dom, p = self.dom, self.p
        c0 = mexp % p
        mp = mexp // p
        small = self._twist_family(tau)[c0]
        total = dom.zero
        add, mul, zero = dom.add, dom.mul, dom.is_zero
        for b in range(0, l // p + 1):
            s = self._chain_coef(tau + 1, mp, b)
            if not zero(s):
                a = small[l - p * b]
                if not zero(a):
                    total = add(total, mul(s, a))
        return total

    def _rhs_known(self, n):
        """rhs_n with every unassigned unknown read as zero."""
        dom = self.dom
        acc = dom.zero
        add, mul, zero = dom.add, dom.mul, dom.is_zero
        for (i, step, mexp, tau) in self.supp:
            if i > n:
                break
            rem = n - i
            if rem % step:
                continue
            c = self._chain_coef(tau, mexp, rem // step)
            if not zero(c):
                acc = add(acc, mul(self.eps_t[i], c))
        return acc

    def _slots(self, n, j):
        """[(s, coeff)]: the unknown enters rhs_n as coeff * z^(p^s)."""
        out = []
        dom = self.dom
        for (i0, kappa, mult) in self.slot_bases:
            v = self.eps_t.get(i0)
            if v is None or dom.is_zero(v):
                continue
            rem = n - i0
            step = self.p ** kappa
            if rem >= 0 and rem % step == 0 and rem // step == j:
                out.append((self.m + kappa, dom.mul(dom.from_int(mult), v)))
        return out

    # -- the unknown's additive equation ------------------------------------------

    def _unknown_candidates(self, q, slots, zl, n):
        """Solutions z of sum coeff * z^(p^s) - zl*z = q, deterministic order."""
        dom = self.dom
        exps = {}
        for s, coeff in slots:
            cur = exps.get(s, dom.zero)
            exps[s] = dom.add(cur, coeff)
        if not dom.is_zero(zl):
            exps[0] = dom.sub(exps.get(0, dom.zero), zl)
        exps = {s: c for s, c in exps.items() if not dom.is_zero(c)}
        if not exps:
            raise UnassignedDependency(
                f"equation at degree {n} has no dependence on the unknown")
        if len(exps) == 1:
            (s, c), = exps.items()
            return [dom.frob_root(dom.mul(q, dom.inv(c)), s)]
        if not isinstance(dom, Field):
            raise UnsolvableRoot(
                f"additive equation with exponents {sorted(exps)} at degree "
                f"{n} is not solvable over the Laurent coefficient ring")
        deg = self.p ** max(exps)
        coeffs = [dom.zero] * (deg + 1)
        coeffs[0] = dom.neg(q)
        for s, c in exps.items():
            coeffs[self.p ** s] = dom.add(coeffs[self.p ** s], c)
        wrapped = [FieldElement(dom, c) for c in coeffs]
        roots, new_field = poly_roots(
            wrapped, allow_extension=self.allow_extension, seed=self.seed)
        if new_field is not dom:
            raise _NeedExtension(new_field)
        return [rt.code for rt in roots]

    # -- assignment ------------------------------------------------------------------

    def _assign_phi(self, j, value):
        if j != len(self.phis):
            raise AssertionError("phi assigned out of order")
        dom = self.dom
        self.phis.append(value)
        self.frontier = j
        self.transcript.append({"kind": "phi", "n": j, "value": value})
        if dom.is_zero(value):
            return
        n_hi = self.n_hi
        add, mul, zero = dom.add, dom.mul, dom.is_zero
        if self.d * j <= n_hi:
            wj = self._W(j)
            acc = self.lhs_acc
            for n in range(self.d * j, n_hi + 1):
                b = wj[n]
                if not zero(b):
                    acc[n] = add(acc[n], mul(value, b))
        for tau, fam in self.twistpow.items():
            dtw = dom.frob(value, tau)
            for c in range(len(fam) - 1, 0, -1):
                lst = fam[c]
                dpow = dom.one
                for l in range(1, c + 1):
                    dpow = mul(dpow, dtw)
                    if j * l > n_hi:
                        break
                    coef = math.comb(c, l) % self.p
                    if coef == 0:
                        continue
                    cd = mul(dom.from_int(coef), dpow)
                    if c - l == 0:
                        lst[j * l] = add(lst[j * l], cd)
                    else:
                        low = fam[c - l]
                        off = j * l
                        for idx in range(0, n_hi + 1 - off):
                            b = low[idx]
                            if not zero(b):
                                lst[idx + off] = add(lst[idx + off],
                                                     mul(cd, b))

    # -- driving ----------------------------------------------------------------------

    def _representative(self, j, members):
        if self.nj_rule == "nprime":
            n = n_prime(self.prof, j)
        elif self.nj_rule == "ndoubleprime":
            n = n_doubleprime(self.prof, j)
        elif self.nj_rule == "custom":
            n = self.nj_table.get(j)
            if n is None:
                n = n_doubleprime(self.prof, j)
        else:
            raise ValidationError(f"unknown N(j) rule {self.nj_rule!r}")
        if n not in members:
            raise ValidationError(
                f"N({j}) = {n} is not in the fiber {members}")
        return n

    def _residual_is_zero(self, x):
        """Best-effort zero test; imprecise Laurent residuals count as zero."""
        dom = self.dom
        probe = getattr(dom, "is_zero_to_prec", None)
        if probe is not None:
            return probe(x)
        return dom.is_zero(x)

    def solve(self):
        dom = self.dom
        if self.mode == "normal":
            for n in fiber(self.prof, 0):
                if n <= self.n_hi:
                    self._register_eps(n, self.eps[n])
        for j in range(1, self.j_hi + 1):
            members = fiber(self.prof, j)
            if members and members[-1] > self.n_hi:
                raise AssertionError("fiber member beyond working order")
            if self.mode == "normal":
                self._solve_fiber_normal(j, members)
            else:
                self._solve_fiber_prescribed(j, members)
        return self

    def _solve_fiber_normal(self, j, members):
        dom = self.dom
        nstar = self._representative(j, members)
        lhs0, zl = self._lhs_pieces(nstar, j)
        rhs0 = self._rhs_known(nstar)
        slots = self._slots(nstar, j)
        q = dom.sub(lhs0, rhs0)
        cands = self._unknown_candidates(q, slots, zl, nstar)
        if not cands:
            raise NoRootInField(
                f"no solution for phi_{j} in the current field")
        idx = self._take_choice(len(cands))
        self._register_eps(nstar, dom.zero)
        self.transcript[-1]["roots_considered"] = len(cands)
        self._assign_phi(j, cands[idx])
        for n in members:
            if n == nstar:
                continue
            val = dom.sub(self._lhs_full(n), self._rhs_known(n))
            self._register_eps(n, val)
        # full re-evaluation of the representative equation, now that the
        # unknown is fixed: catches any slip in the slot bookkeeping
        if not self._residual_is_zero(
                dom.sub(self._lhs_full(nstar), self._rhs_known(nstar))):
            raise UnassignedDependency(
                f"equation at degree {nstar} fails after solving fiber {j}")

    def _solve_fiber_prescribed(self, j, members):
        dom = self.dom
        pieces = []
        for n in members:
            lhs0, zl = self._lhs_pieces(n, j)
            pieces.append((n, lhs0, zl, self._rhs_known(n), self._slots(n, j)))
        # prefer equations with the simplest dependence on the unknown; fall
        # through when a member's additive equation is not solvable here
        order = sorted((pc for pc in pieces
                        if pc[4] or not dom.is_zero(pc[2])),
                       key=lambda pc: (len(pc[4]), pc[0]))
        if not order:
            raise UnassignedDependency(
                f"fiber {j} has no equation touching phi_{j}")
        winner = None
        last_err = None
        for n, lhs0, zl, rhs0, slots in order:
            q = dom.sub(lhs0, rhs0)
            try:
                cands = self._unknown_candidates(q, slots, zl, n)
            except UnsolvableRoot as exc:
                last_err = exc
                continue
            for z in cands:
                if all(self._member_residual_zero(pc, z) for pc in pieces):
                    winner = z
                    break
            if winner is not None:
                break
        if winner is None:
            if last_err is not None:
                raise last_err
            raise UnsolvableRoot(
                f"no root of the fiber-{j} equation matches the prescribed "
                f"target at degrees {[pc[0] for pc in pieces]}")
        self._assign_phi(j, winner)

    def _member_residual_zero(self, piece, z):
        dom = self.dom
        n, lhs0, zl, rhs0, slots = piece
        lhs = dom.add(lhs0, dom.mul(zl, z))
        rhs = rhs0
        for s, coeff in slots:
            rhs = dom.add(rhs, dom.mul(coeff, dom.frob(z, s)))
        return self._residual_is_zero(dom.sub(lhs, rhs))


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------

def normalize_unit(f: Germ1D):
    """Conjugate by x -> lam*x so the leading unit coefficient becomes 1.

    Returns (f', lam, field); the field is extended when the needed root of
    z^(d p^m - 1) does not exist.  lam is chosen deterministically (smallest
    coefficient vector) among the roots.
    """
    dom = f.dom
    s = f.series
    bigd = s.ord()
    lead = s.coeffs[bigd]
    if dom.is_zero(dom.sub(lead, dom.one)):
        return f, dom.one, dom
    if bigd == 2:  # z^1 = lead^-1 directly
        lam_codes = [dom.inv(lead)]
        new_field = dom
    else:
        coeffs = [dom.zero] * bigd
        coeffs[0] = dom.neg(dom.inv(lead))
        coeffs[bigd - 1] = dom.one
        wrapped = [FieldElement(dom, c) for c in coeffs]
        roots, new_field = poly_roots(wrapped, allow_extension=True)
        lam_codes = [rt.code for rt in roots]
    lam = lam_codes[0]
    if new_field is not dom:
        emb = dom.embed_map(new_field)
        coeffs = [emb(c) for c in s.coeffs]
        dom = new_field
    else:
        coeffs = list(s.coeffs)
    lam_pow = dom.inv(lam)  # lam^(l-1) at l = 0
    out = []
    for l, c in enumerate(coeffs):
        out.append(dom.mul(lam_pow, c))
        lam_pow = dom.mul(lam_pow, lam)
    g = Germ1D(dom, Series(dom, out, s.trunc), normalization=lam)
    return g, lam, dom


def _split_unit(f: Germ1D):
    """(profile, unit coefficient list of 1+eps, m, d) for a normalized germ."""
    prof = profile(f)
    g, m = f.split()
    d = g.ord()
    unit = g.coeffs[d:]
    return prof, unit


def min_trunc(prof: InvariantProfile) -> int:
    """Smallest working order the solver accepts for this profile."""
    p = prof.p
    return p ** prof.m * (prof.d + (p * prof.r[0]) // (p - 1) + 1)


def normal_form(f: Germ1D, choice="ndoubleprime", trunc=64, seed=0,
                allow_extension=True, nj_table=None, _prefix=()):
    """Solve the conjugacy recursion: returns (NormalForm, ConjugacyWitness).

    The witness phi has phi(0) = 1 and conjugates the unit-normalized germ
    onto the normal form, verified to order ``trunc`` by the independent
    composition oracle.  Deterministic for a fixed seed (and in fact across
    seeds: root choices use a fixed total order on field elements).
    """
    f0, lam, dom = normalize_unit(f)
    if f0.series.trunc < trunc:
        # the germ is its polynomial: declaring more exact zeros is sound
        f0 = Germ1D(dom, f0.series.extended(trunc))
    prof = profile(f0)
    if trunc < min_trunc(prof):
        raise InsufficientPrecision(
            f"normal_form needs truncation >= {min_trunc(prof)}",
            needed=min_trunc(prof))
    if nj_table is not None:
        choice = "custom"
        for j, n in nj_table.items():
            if jays(prof, n)[1] != j:
                raise ValidationError(f"custom table: J({n}) != {j}")
    j_hi = trunc - 1
    attempts = 0
    f0_base, lam_base, base_field = f0, lam, f0.dom
    extensions = []
    while True:
        prof = profile(f0)
        _, unit = _split_unit(f0)
        eng = _Engine(f0.dom, prof, unit, j_hi, mode="normal", nj_rule=choice,
                      nj_table=nj_table, allow_extension=allow_extension,
                      seed=seed, prefix=_prefix)
        try:
            eng.solve()
            break
        except _NeedExtension as ex:
            attempts += 1
            if attempts > 8:
                raise NoRootInField("extension chain did not stabilize")
            # one-hop embedding from the base field keeps values coherent
            # across restarts (stepwise chains may pick different roots)
            extensions.append({"kind": "extension", "n": None,
                               "value": None, "k": ex.field.k})
            emb = base_field.embed_map(ex.field)
            coeffs = [emb(c) for c in f0_base.series.coeffs]
            f0 = Germ1D(ex.field, Series(ex.field, coeffs,
                                         f0_base.series.trunc))
            lam = emb(lam_base)
    eng.transcript[:0] = extensions
    dom = f0.dom
    nz = [n for n, v in eng.eps_t.items() if not dom.is_zero(v)]
    deg = max(nz) if nz else 0
    if prof.e >= 1:
        bound = choice_bound(prof) * prof.p
        if deg >= bound:
            raise ShapeViolation(
                f"target support reaches degree {deg} >= {bound}")
    elif deg > 0:
        raise ShapeViolation("coprime-degree target must be x^(d p^m)")
    a = [dom.zero] * (deg + 1)
    for n, v in eng.eps_t.items():
        if n <= deg:
            a[n] = v
    nf = NormalForm(prof.m, prof.d, prof.e, prof.r, a, dom, choice, nj_table)
    phi = Series(dom, list(eng.phis), j_hi)
    report = verify_conjugacy(f0, nf.germ(trunc), phi.shift(1), trunc)
    if not report.ok:
        raise UnassignedDependency(
            f"solver output fails the composition oracle at degree "
            f"{report.first_disagreement}")
    wit = ConjugacyWitness(phi, lam, report.checked_order, eng.transcript)
    wit.choice_points = eng.choice_points
    return nf, wit


def enumerate_normal_forms(f: Germ1D, choice="ndoubleprime", trunc=64,
                           seed=0, limit=128):
    """All normal forms reachable by varying the solver's root choices.

    Exhaustive depth-first exploration of the (finite) root-choice tree;
    returns a list of (NormalForm, ConjugacyWitness)."""
    results = []
    seen = set()

    def explore(prefix):
        if len(results) >= limit:
            return
        nf, wit = normal_form(f, choice=choice, trunc=trunc, seed=seed,
                              _prefix=prefix)
        results.append((nf, wit))
        cps = wit.choice_points
        for pos in range(len(prefix), len(cps)):
            for alt in range(1, cps[pos]):
                key = prefix[: pos] + (0,) * (pos - len(prefix)) + (alt,)
                if key not in seen:
                    seen.add(key)
                    explore(key)

    explore(())
    return results


def verify_conjugacy(f: Germ1D, f_target: Germ1D, phi_full: Series, trunc):
    """Brute-force check of Phi o f = f_target o Phi by full composition.

    ``phi_full`` is Phi itself (order of vanishing 1).  Shares no code with
    the solver's incremental coefficient extraction."""
    lhs = phi_full.compose(f.series, trunc=trunc)
    rhs = f_target.series.compose(phi_full, trunc=trunc)
    checked = min(lhs.trunc, rhs.trunc, trunc)
    bad = lhs.truncate(checked).agree_order(rhs.truncate(checked))
    return ConjReport(bad is None, checked, bad)


def lhs_rhs_coeffs(f: Germ1D, f_target: Germ1D, phi: Series, n: int):
    """Degree-n coefficients of both sides of the unit conjugacy relation:
    (1+eps(y)) phi(y^d(1+eps)) vs (T^m phi)^d (1 + eps~(y T^m phi)).

    Computed by truncated series algebra over the y-coordinate; all entering
    coefficients must lie within the truncations."""
    prof = profile(f)
    g, m = f.split()
    gt, mt = f_target.split()
    if mt != m:
        raise ValidationError("targets must share the Frobenius depth m")
    d = g.ord()
    u = Series(f.dom, g.coeffs[d:], g.trunc - d)
    ut = Series(f.dom, gt.coeffs[gt.ord():], gt.trunc - gt.ord())
    w = u.shift(d)
    phi_y = phi.truncate(min(phi.trunc, n))
    lhs = u.mul(phi_y.compose(w, trunc=n), trunc=n)
    tphi = phi_y.twist(m)
    ytp = tphi.shift(1)
    # ut is the full unit 1 + eps~, so composing with y*T^m(phi) already
    # carries the constant term
    rhs = tphi.pow_int(d, trunc=n).mul(ut.compose(ytp, trunc=n), trunc=n)
    if n > lhs.trunc or n > rhs.trunc:
        raise UnassignedDependency(
            f"degree {n} exceeds determined range (lhs {lhs.trunc}, "
            f"rhs {rhs.trunc})")
    return lhs.coeff(n), rhs.coeff(n)


def check_nf_conditions(nf: NormalForm):
    """The four support conditions plus the degree bound, as booleans."""
    dom = nf.dom
    p = dom.p
    out = {}
    a = nf.a
    get = lambda n: a[n] if n < len(a) else dom.zero
    out["i_unit"] = dom.is_zero(dom.sub(get(0), dom.one))
    ok = True
    for u in range(nf.e):
        for n in range(1, nf.r[u]):
            if nu_p(p, n) == u and not dom.is_zero(get(n)):
                ok = False
    out["ii_zeros_below_r"] = ok
    out["iii_r_nonzero"] = all(not dom.is_zero(get(nf.r[u]))
                               for u in range(nf.e))
    prof = InvariantProfile(p, nf.m, nf.d, nf.e, nf.r)
    ok = True
    if nf.e >= 1:
        bound = choice_bound(prof)
        j = 1
        while j < bound:
            if nf.choice == "nprime":
                n = n_prime(prof, j)
            elif nf.choice == "custom" and nf.nj_table and j in nf.nj_table:
                n = nf.nj_table[j]
            else:
                n = n_doubleprime(prof, j)
            if not dom.is_zero(get(n)):
                ok = False
            j += 1
    out["iv_representatives_zero"] = ok
    if nf.e == 0:
        out["degree_bound"] = len(a) == 1 and out["i_unit"]
    else:
        out["degree_bound"] = len(a) - 1 < p * choice_bound(prof)
    return out


def bhard_extract(nf: NormalForm):
    """Regroup an ndoubleprime normal form as a(x^(p^(m+1))) + b x^(r_0 p^m).

    Every surviving exponent other than r_0 must be divisible by p; the
    regrouped polynomial a(z) has degree < r_0/(p-1)."""
    if nf.e < 1:
        raise ValidationError("the regrouped shape needs e >= 1")
    if nf.choice != "ndoubleprime":
        raise ValidationError("extraction is defined for ndoubleprime forms")
    dom = nf.dom
    p = dom.p
    r0 = nf.r[0]
    a_z = {}
    b = None
    for n, c in enumerate(nf.a):
        if dom.is_zero(c):
            continue
        if n == r0:
            b = c
            continue
        if n % p:
            raise ShapeViolation(
                f"exponent {n} is neither r_0 nor divisible by p")
        a_z[n // p] = c
    if b is None or dom.is_zero(b):
        raise ShapeViolation("vanishing coefficient at the invariant position")
    deg = max(a_z) if a_z else 0
    if a_z and not deg < choice_bound(
            InvariantProfile(p, nf.m, nf.d, nf.e, nf.r)):
        raise ShapeViolation(f"deg a = {deg} >= r_0/(p-1)")
    out = [dom.zero] * (deg + 1)
    for n, c in a_z.items():
        out[n] = c
    return out, b


def bottcher_product(f: Germ1D, trunc=64):
    """The coprime-degree conjugacy as a truncated infinite product.

    Needs gcd(d, p) = 1 and a unit-normalized germ.  Factors are
    (1 + eps^(n))^(1/d^(n+1)) with eps^(0) the m-fold Frobenius-root twist
    of eps and eps^(n+1) the twist of eps^(n) o g; factors beyond the
    truncation are units that differ from 1 only past the working order."""
    dom = f.dom
    prof = profile(f)
    p, m, d = dom.p, prof.m, prof.d
    if d % p == 0:
        raise NotCoprime(f"d = {d} shares the characteristic {p}")
    if d < 2:
        # the truncated product does not stabilize formally when d = 1;
        # the fiber recursion (normal_form) covers that case
        raise ValueError("bottcher_product needs d >= 2")
    j_hi = trunc - 1
    step = p ** m
    src = f.series.extended(step * (d + j_hi))
    g, _ = Germ1D(dom, src).split()
    du = g.ord()
    if not dom.is_zero(dom.sub(g.coeffs[du], dom.one)):
        raise ValueError("bottcher_product needs the unit-normalized germ")
    t_y = g.trunc - d
    u = Series(dom, g.coeffs[d:], t_y)
    eps = u - Series.one(dom, t_y)
    phi = Series.one(dom, t_y)
    level = eps.untwist(m)
    denom = d
    while not level.is_zero_to_prec():
        phi = phi.mul(binomial_pow(Series.one(dom, t_y) + level, 1, denom),
                      trunc=t_y)
        nxt = level.compose(g, trunc=t_y)
        level = nxt.untwist(m)
        denom *= d
    target = Germ1D(dom, Series.monomial(dom, dom.one, step * d, trunc))
    report = verify_conjugacy(f, target, phi.shift(1), trunc)
    if not report.ok:
        raise UnassignedDependency(
            f"product construction fails the composition oracle at degree "
            f"{report.first_disagreement}")
    return ConjugacyWitness(phi.truncate(j_hi), dom.one, report.checked_order,
                            [{"kind": "product"}])


def random_conjugate(f: Germ1D, seed, trunc=None):
    """(f', Phi) with f' = Phi o f o Phi^-1 for a seeded random unit Phi."""
    import random as _random
    dom = f.dom
    t = f.trunc if trunc is None else trunc
    rng = _random.Random(seed)
    phi = [dom.one] + [dom.rand(rng) for _ in range(t - 1)]
    phi_full = Series(dom, phi, t - 1).shift(1)
    psi = revert(phi_full)
    inner = f.series.compose(psi, trunc=t)
    outer = phi_full.compose(inner, trunc=t)
    return Germ1D(dom, outer), phi_full
