"""Trivial U(1) principal bundle over the matrix algebra.

The structure group only ever enters through integer charges: the group
algebra is spanned by monomials z^n, the vertical germ g satisfies
pi(z^n) = n g, g* = -g, dg = 0, g g = 0, and sections of the associated
line bundles are matrix coefficients carrying a charge. A connection is
a grade-1 form A (its vertical part is fixed), and all covariant objects
reduce to operations on forms tagged with a charge and a side.

The fast implementations below push the charge rule through symbolically.
Their signs are pinned by `reference_cov_derivative`, a slow evaluator
that materializes total-space coefficients in M tensor {z^n, z^n g} and
applies the defining formula D(phi) = d phi - (-1)^k phi omega(pi(phi));
the two routes are compared in the test suite and the verification sweep.
"""

from __future__ import annotations

import numpy as np

from .matforms import DiffForm, dagger
from .qriemann import (IDENTITY_TOL, codifferential, hodge, hodge_inner,
                       hodge_inv, metric, state)

_SIDES = ("left", "right")


class ChargeMismatchError(ValueError):
    """Pairing of charged objects with different charge or side."""


def _check_side(side):
    if side not in _SIDES:
        raise ValueError(f"side must be one of {_SIDES}, got {side!r}")


class GaugeConnection:
    """A connection on the trivial bundle, stored as its grade-1 form A."""

    __slots__ = ("A",)

    def __init__(self, A):
        if A.terms and A.grades() != [1]:
            raise ValueError("connection form must be pure grade 1")
        self.A = A

    @property
    def calc(self):
        return self.A.calc

    @classmethod
    def zero(cls, calc):
        return cls(calc.zero_form())

    def curvature(self):
        """R = dA; the germ part of the total-space curvature vanishes."""
        return self.A.d()

    def hat(self):
        """The conjugated connection, with form -A*."""
        return GaugeConnection(-self.A.star())

    def is_real(self, tol=IDENTITY_TOL):
        diff = self.A + self.A.star()
        return diff.is_zero() if self.calc.exact else diff.frobenius() <= tol

    def is_regular(self, tol=IDENTITY_TOL):
        """True iff every coefficient of A is a multiple of the identity."""
        Id = self.calc.identity()
        for p in self.A.terms.values():
            trace_part = state(p) * Id
            resid = p - trace_part
            if self.calc.exact:
                if np.any(resid):
                    return False
            else:
                scale = max(1.0, float(np.max(np.abs(np.asarray(p, dtype=complex)))))
                if np.max(np.abs(np.asarray(resid, dtype=complex))) > tol * scale:
                    return False
        return True

    def __add__(self, other):
        if isinstance(other, ConnectionDisplacement):
            return GaugeConnection(self.A + other.form)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, GaugeConnection):
            return ConnectionDisplacement(self.A - other.A)
        if isinstance(other, ConnectionDisplacement):
            return GaugeConnection(self.A - other.form)
        return NotImplemented

    def __repr__(self):
        return f"GaugeConnection({self.A!r})"

    def to_payload(self):
        calc = self.calc
        mats = []
        for j in range(1, calc.dim + 1):
            p = np.asarray(self.A.component((j,)), dtype=complex)
            mats.append([[[float(x.real), float(x.imag)] for x in row] for row in p])
        return {"A": mats}

    @classmethod
    def from_payload(cls, calc, payload):
        mats = payload["A"]
        if len(mats) != calc.dim:
            raise ValueError(f"expected {calc.dim} coefficient matrices, got {len(mats)}")
        terms = {}
        for j, rows in enumerate(mats, start=1):
            m = calc.zero_matrix()
            for r in range(calc.N):
                for c in range(calc.N):
                    re, im = rows[r][c]
                    if calc.exact:
                        from fractions import Fraction

                        from .exact import GaussianRational
                        m[r, c] = GaussianRational(Fraction(re), Fraction(im))
                    else:
                        m[r, c] = complex(re, im)
            terms[(j,)] = m
        return cls(DiffForm(calc, terms))


class ConnectionDisplacement:
    """A direction in the affine space of connections: a grade-1 form."""

    __slots__ = ("form",)

    def __init__(self, form):
        if form.terms and form.grades() != [1]:
            raise ValueError("displacement must be pure grade 1")
        self.form = form

    @property
    def calc(self):
        return self.form.calc

    def __add__(self, other):
        if isinstance(other, ConnectionDisplacement):
            return ConnectionDisplacement(self.form + other.form)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, ConnectionDisplacement):
            return ConnectionDisplacement(self.form - other.form)
        return NotImplemented

    def __mul__(self, scalar):
        return ConnectionDisplacement(self.form * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return ConnectionDisplacement(-self.form)

    def real_decomposition(self):
        """lambda = lambda_r + i lambda_i with both parts real (mu* = -mu)."""
        sc = self.calc.scalars
        half = sc.frac(1, 2)
        lam_r = (self.form - self.form.star()) * half
        lam_i = (self.form + self.form.star()) * (-sc.i * half)
        return ConnectionDisplacement(lam_r), ConnectionDisplacement(lam_i)


class ChargedSection:
    """Grade-0 section of the charge-n associated line bundle.

    Left sections are p.T^n, right sections T^n.p; either way the data is
    the matrix p plus the charge and the side.
    """

    __slots__ = ("calc", "charge", "side", "p")

    def __init__(self, calc, charge, side, p):
        _check_side(side)
        self.calc = calc
        self.charge = int(charge)
        self.side = side
        self.p = calc.matrix(p)

    def as_qvb(self):
        return QvbForm(self.charge, self.side, self.calc.scalar_form(self.p))

    def __repr__(self):
        return f"ChargedSection(n={self.charge}, side={self.side!r})"


def section_inner(T1, T2):
    """<T1, T2>: p1 p2* on the left side, p1* p2 on the right."""
    if (T1.charge, T1.side) != (T2.charge, T2.side):
        raise ChargeMismatchError("section inner product needs matching charge and side")
    if T1.side == "left":
        return T1.p @ dagger(T2.p)
    return dagger(T1.p) @ T2.p


class QvbForm:
    """A bundle-valued form: a plain form tagged with charge and side."""

    __slots__ = ("charge", "side", "form")

    def __init__(self, charge, side, form):
        _check_side(side)
        self.charge = int(charge)
        self.side = side
        self.form = form

    @property
    def calc(self):
        return self.form.calc

    def _match(self, other):
        if (self.charge, self.side) != (other.charge, other.side):
            raise ChargeMismatchError(
                f"charge/side mismatch: ({self.charge},{self.side}) vs"
                f" ({other.charge},{other.side})")

    def __add__(self, other):
        self._match(other)
        return QvbForm(self.charge, self.side, self.form + other.form)

    def __sub__(self, other):
        self._match(other)
        return QvbForm(self.charge, self.side, self.form - other.form)

    def __mul__(self, scalar):
        return QvbForm(self.charge, self.side, self.form * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return QvbForm(self.charge, self.side, -self.form)

    def is_zero(self, tol=0.0):
        return self.form.is_zero(tol)

    def __repr__(self):
        return f"QvbForm(n={self.charge}, side={self.side!r}, {self.form!r})"


def as_qvb(x):
    return x.as_qvb() if isinstance(x, ChargedSection) else x


def upsilon_inv(mu, T):
    """Collapse mu tensor T into a single charged form."""
    form = mu.rmul(T.p) if T.side == "left" else mu.lmul(T.p)
    return QvbForm(T.charge, T.side, form)


def upsilon(psi):
    """Factor a charged form through the unit section of its charge."""
    unit = ChargedSection(psi.calc, psi.charge, psi.side, psi.calc.identity())
    return psi.form, unit


def qvb_inner(a, b):
    """Inner product of bundle-valued forms of matching charge and side."""
    a, b = as_qvb(a), as_qvb(b)
    a._match(b)
    return hodge_inner(a.form, b.form, a.side)


def cov_derivative(conn, psi):
    """Exterior covariant derivative.

    Left charge n on a grade-k piece q: dq - (-1)^k n q A. Right charge
    m: dq + m A* q on every grade; this is * D_{-m} * and the sign-free
    grading is not a typo. Charge 0 reduces to d for every connection.
    """
    psi = as_qvb(psi)
    n, A = psi.charge, conn.A
    if psi.side == "right":
        return QvbForm(n, "right", psi.form.d() + n * (A.star() * psi.form))
    out = psi.form.d()
    if n:
        for k in psi.form.grades():
            part = psi.form.graded_part(k) * A
            out = out - (n if k % 2 == 0 else -n) * part
    return QvbForm(n, "left", out)


def cov_codifferential(conn, psi):
    """Adjoint of cov_derivative w.r.t. qvb_inner, for every connection.

    On a left grade-g piece: d*q - (-1)^(g-1) n star_inv(A (star q)); the
    second term is antilinear in A, which is what makes this the true
    adjoint even for connections that are not real. Right side by
    involution conjugation at opposite charge.
    """
    psi = as_qvb(psi)
    n = psi.charge
    if psi.side == "right":
        flipped = QvbForm(-n, "left", psi.form.star())
        res = cov_codifferential(conn, flipped)
        return QvbForm(n, "right", res.form.star())
    A = conn.A
    out = codifferential(psi.form, "left")
    if n:
        for g in psi.form.grades():
            if g == 0:
                continue
            part = hodge_inv(A * hodge(psi.form.graded_part(g)))
            out = out - (n if (g - 1) % 2 == 0 else -n) * part
    return QvbForm(n, "left", out)


def cov_laplacian(conn, psi):
    psi = as_qvb(psi)
    return (cov_codifferential(conn, cov_derivative(conn, psi))
            + cov_derivative(conn, cov_codifferential(conn, psi)))


def displacement_K(lam, T, base=None):
    """K^lambda, the difference of the covariant derivatives of two
    connections separated by lam; base defaults to the trivial one."""
    psi = as_qvb(T)
    if base is None:
        base = GaugeConnection.zero(psi.calc)
    return cov_derivative(base + lam, psi) - cov_derivative(base, psi)


class SOmega:
    """The extra curvature-transport operator of the general field
    equations. The embedded differential is forced to vanish here, so
    this operator and its adjoint are identically zero; it exists to keep
    the field equations assembled in full."""

    __slots__ = ()

    def __call__(self, x):
        x = as_qvb(x) if isinstance(x, ChargedSection) else x
        if isinstance(x, QvbForm):
            return QvbForm(x.charge, x.side, x.calc.zero_form())
        return x.calc.zero_form()

    def adjoint(self):
        return self


def s_omega(conn):
    return SOmega()


# -- total-space reference evaluator -------------------------------------

class _TotalForm:
    """Forms on the total space, materialized as {(charge, germ degree):
    form} with germ degree 0 or 1. Slow; exists to pin signs."""

    __slots__ = ("calc", "terms")

    def __init__(self, calc, terms):
        self.calc = calc
        self.terms = {key: f for key, f in terms.items() if f.terms}

    def __add__(self, other):
        out = dict(self.terms)
        for key, f in other.terms.items():
            out[key] = out[key] + f if key in out else f
        return _TotalForm(self.calc, out)

    def __sub__(self, other):
        return self + (-1) * other

    def __rmul__(self, scalar):
        return _TotalForm(self.calc, {k: f * scalar for k, f in self.terms.items()})

    def product(self, other):
        out = {}
        for (c1, g1), f1 in self.terms.items():
            for (c2, g2), f2 in other.terms.items():
                if g1 + g2 > 1:
                    continue  # germ squares to zero
                key = (c1 + c2, g1 + g2)
                for k2 in f2.grades():
                    # the germ anticommutes with odd form factors
                    piece = f1 * f2.graded_part(k2)
                    if g1 and k2 % 2:
                        piece = -piece
                    out[key] = out[key] + piece if key in out else piece
        return _TotalForm(self.calc, out)

    def d(self):
        out = {}

        def acc(key, f):
            out[key] = out[key] + f if key in out else f

        for (c, g), f in self.terms.items():
            acc((c, g), f.d())
            if g == 0 and c != 0:
                for k in f.grades():
                    piece = c * f.graded_part(k)
                    acc((c, 1), piece if k % 2 == 0 else -piece)
        return _TotalForm(self.calc, out)

    def star(self):
        out = {}
        for (c, g), f in self.terms.items():
            piece = f.star()
            out[(-c, g)] = piece if g == 0 else -piece
        return _TotalForm(self.calc, out)

    def charge_part(self, charge, germ_degree):
        return self.terms.get((charge, germ_degree), self.calc.zero_form())


def connection_total_form(conn):
    """omega(g) as a total-space 1-form: A plus the vertical germ."""
    calc = conn.calc
    return _TotalForm(calc, {
        (0, 0): conn.A,
        (0, 1): calc.scalar_form(calc.identity()),
    })


def reference_cov_derivative(conn, psi):
    """Evaluate D(phi) = d phi - (-1)^k phi . n omega(g) on the total space.

    The vertical parts must cancel; that cancellation and the sign of the
    surviving horizontal part are exactly what this oracle certifies.
    """
    psi = as_qvb(psi)
    calc, n = psi.calc, psi.charge
    if psi.side == "right":
        flipped = QvbForm(-n, "left", psi.form.star())
        res = reference_cov_derivative(conn, flipped)
        return QvbForm(n, "right", res.form.star())
    omega = connection_total_form(conn)
    result = calc.zero_form()
    leftover = calc.zero_form()
    for k in (psi.form.grades() or [0]):
        phi = _TotalForm(calc, {(n, 0): psi.form.graded_part(k)})
        term = phi.product((n if k % 2 == 0 else -n) * omega) if n else _TotalForm(calc, {})
        D = phi.d() - term
        result = result + D.charge_part(n, 0)
        leftover = leftover + D.charge_part(n, 1)
        for key in D.terms:
            if key not in ((n, 0), (n, 1)):
                raise AssertionError(f"reference evaluator produced stray charge {key}")
    if not leftover.is_zero(1e-12):
        raise AssertionError("vertical parts of the reference evaluation did not cancel")
    return QvbForm(n, "left", result)


def reference_curvature(conn):
    """d omega(g) on the total space; the germ part must vanish."""
    omega = connection_total_form(conn)
    domega = omega.d()
    vert = domega.charge_part(0, 1)
    if not vert.is_zero(1e-12):
        raise AssertionError("curvature reference has a vertical remainder")
    return domega.charge_part(0, 0)
