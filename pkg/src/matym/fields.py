"""Actions, field equations, variational oracles, and the stationary solver.

Conventions for the variational pairings, fixed once here and verified
against central finite differences in the test suite:

  connection direction lam:  dS/dz = <lam | G>_L, where G = (1/4) E for
      coupled configurations (E the assembled connection equation) and
      G = -(1/2) d*dA for pure Yang-Mills;
  left section direction u:  dS/dz = (1/4) <u | R1>_L;
  right section direction v: dS/dz = -(1/4) <R2 | v>_R.

The residual operations return the field equations in their printed
shapes (zero sets define stationarity); `analytic_gradient` applies the
constants above, and `action_gradient_fd` is the independent oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .matforms import CONVENTIONS_ID, dagger
from .qbundle import (ChargedSection, GaugeConnection, QvbForm,
                      cov_codifferential, cov_derivative, s_omega,
                      section_inner)
from .qriemann import (codifferential, form_to_vec, hodge_inner, metric,
                       operator_matrix, state, vec_to_form)


class PolynomialPotential:
    """V(q) = sum c_k q^k on scalar or matrix arguments."""

    __slots__ = ("coefficients",)

    def __init__(self, coefficients):
        coeffs = list(coefficients)
        while len(coeffs) > 1 and not coeffs[-1]:
            coeffs.pop()
        self.coefficients = tuple(coeffs) if coeffs else (0,)

    @property
    def is_constant(self):
        return all(not c for c in self.coefficients[1:])

    def _horner(self, coeffs, q):
        if not isinstance(q, np.ndarray):
            out = 0 * q
            for c in reversed(coeffs):
                out = out * q + c
            return out
        n = q.shape[0]
        if q.dtype == object:
            out = np.empty((n, n), dtype=object)
            eye = np.empty((n, n), dtype=object)
            from .exact import GR_ONE, GR_ZERO
            for r in range(n):
                for c in range(n):
                    eye[r, c] = GR_ONE if r == c else GR_ZERO
                    out[r, c] = GR_ZERO
        else:
            eye = np.eye(n, dtype=complex)
            out = np.zeros((n, n), dtype=complex)
        for c in reversed(coeffs):
            out = out @ q + c * eye
        return out

    def __call__(self, q):
        return self._horner(self.coefficients, q)

    def derivative(self, q):
        dcoeffs = [k * c for k, c in enumerate(self.coefficients)][1:] or [0]
        return self._horner(dcoeffs, q)

    def __repr__(self):
        return f"PolynomialPotential({list(self.coefficients)})"


ZERO_POTENTIAL = PolynomialPotential((0,))


class FieldConfiguration:
    """A connection plus an optional charge-n / charge-(-n) section pair."""

    __slots__ = ("connection", "left", "right", "potential")

    def __init__(self, connection, left=None, right=None, potential=None):
        self.connection = connection
        self.left = left
        self.right = right
        self.potential = potential if potential is not None else ZERO_POTENTIAL
        if left is not None and left.side != "left":
            raise ValueError("left section must have side 'left'")
        if right is not None and right.side != "right":
            raise ValueError("right section must have side 'right'")
        if left is not None and right is not None and left.charge != -right.charge:
            raise ValueError(
                f"section charges must be opposite, got {left.charge} and {right.charge}")

    @property
    def calc(self):
        return self.connection.calc

    @property
    def charge(self):
        if self.left is not None:
            return self.left.charge
        if self.right is not None:
            return -self.right.charge
        return 0

    @property
    def has_sections(self):
        return self.left is not None or self.right is not None

    def replace(self, connection=None, left_p=None, right_p=None):
        conn = connection if connection is not None else self.connection
        left = self.left
        if left_p is not None:
            left = ChargedSection(self.calc, self.left.charge, "left", left_p)
        right = self.right
        if right_p is not None:
            right = ChargedSection(self.calc, self.right.charge, "right", right_p)
        return FieldConfiguration(conn, left, right, self.potential)


class VariationDirection:
    """A direction in configuration space: a grade-1 form or a matrix."""

    __slots__ = ("kind", "value")

    KINDS = ("connection", "left", "right")

    def __init__(self, kind, value):
        if kind not in self.KINDS:
            raise ValueError(f"kind must be one of {self.KINDS}")
        self.kind = kind
        self.value = value

    @classmethod
    def connection(cls, form):
        return cls("connection", form)

    @classmethod
    def left(cls, matrix):
        return cls("left", matrix)

    @classmethod
    def right(cls, matrix):
        return cls("right", matrix)


def shifted(cfg, direction, z):
    """cfg moved by z times the direction; the FD oracle's probe."""
    if direction.kind == "connection":
        return cfg.replace(connection=GaugeConnection(cfg.connection.A + z * direction.value))
    if direction.kind == "left":
        return cfg.replace(left_p=cfg.left.p + z * cfg.calc.matrix(direction.value))
    return cfg.replace(right_p=cfg.right.p + z * cfg.calc.matrix(direction.value))


# -- actions --------------------------------------------------------------

def ym_action(conn):
    """-1/4 (<F|F>_L + <F_hat|F_hat>_R); real, nonpositive, zero iff flat.

    Both inner products are evaluated; their equality is a *-symmetry the
    tests pin separately, not something assumed here.
    """
    sc = conn.calc.scalars
    F = conn.curvature()
    Fh = conn.hat().curvature()
    total = hodge_inner(F, F, "left") + hodge_inner(Fh, Fh, "right")
    return sc.frac(-1, 4) * total


def _section_lagrangian(conn, T1, T2, potential):
    """Matrix-valued Lagrangian of one section pair under a connection."""
    calc = conn.calc
    sc = calc.scalars
    L = calc.zero_matrix()
    if T1 is not None:
        q1 = cov_derivative(conn, T1).form
        L = L + metric(q1, q1, "left") - potential(section_inner(T1, T1))
    if T2 is not None:
        q2 = cov_derivative(conn, T2).form
        L = L - metric(q2, q2, "right") + potential(section_inner(T2, T2))
    return sc.frac(1, 4) * L


def gsm_action(cfg):
    """Integral of the charged-scalar-matter Lagrangian."""
    return state(_section_lagrangian(cfg.connection, cfg.left, cfg.right, cfg.potential))


def sm_action(calc, left_ps, right_ps, potential):
    """Charge-0 multiplet action; components contribute independently."""
    if len(left_ps) != len(right_ps):
        raise ValueError("multiplets must have the same number of components")
    conn = GaugeConnection.zero(calc)
    total = calc.scalars.zero
    for p, q in zip(left_ps, right_ps):
        T1 = ChargedSection(calc, 0, "left", p)
        T2 = ChargedSection(calc, 0, "right", q)
        total = total + state(_section_lagrangian(conn, T1, T2, potential))
    return total


def ymsm_action(cfg):
    total = ym_action(cfg.connection)
    if cfg.has_sections:
        total = total + gsm_action(cfg)
    return total


# -- field equations ------------------------------------------------------

def ym_residual(conn):
    """d*dA, the Yang-Mills equation for this bundle; zero iff flat."""
    return codifferential(conn.curvature(), "left")


def sm_residuals(calc, left_ps, right_ps, potential):
    """Charge-0 multiplet equations, component-wise and as printed:
    left  d*d p - V'(p p+)+ p, right  d*d p+ - V'(p+ p) p+."""
    lefts, rights = [], []
    for p in left_ps:
        p = calc.matrix(p)
        lap = codifferential(calc.scalar_form(p).d(), "left").component(())
        lefts.append(lap - dagger(potential.derivative(p @ dagger(p))) @ p)
    for q in right_ps:
        q = calc.matrix(q)
        qd = dagger(q)
        lap = codifferential(calc.scalar_form(qd).d(), "left").component(())
        rights.append(lap - potential.derivative(qd @ q) @ qd)
    return lefts, rights


def ymsm_connection_residual(cfg):
    """The assembled connection equation.

    For charge n != 0 this is the combination in the charge-weighted
    normalization p1 = n a, p2 = -n b:
        -(1/n)(p1+ dp1 - p2 dp2+) + p1+p1 A - p2 p2+ A - 2 d*dA.
    For n = 0 the sections decouple and the Yang-Mills equation d*dA is
    returned instead.
    """
    n = cfg.charge
    if n == 0 or not cfg.has_sections:
        return ym_residual(cfg.connection)
    calc = cfg.calc
    sc = calc.scalars
    A = cfg.connection.A
    a = cfg.left.p if cfg.left is not None else calc.zero_matrix()
    b = cfg.right.p if cfg.right is not None else calc.zero_matrix()
    p1 = n * a
    p2 = -n * b
    dp1 = calc.scalar_form(p1).d()
    dp2c = calc.scalar_form(dagger(p2)).d()
    out = (dp1.lmul(dagger(p1)) - dp2c.lmul(p2)) * sc.frac(-1, n)
    out = out + A.lmul(dagger(p1) @ p1) - A.lmul(p2 @ dagger(p2))
    out = out - 2 * ym_residual(cfg.connection)
    return out


def ymsm_section_residuals(cfg):
    """Section equations as sections: coefficients of
    cov* cov T1 - V'_L(T1)+ T1  and  cov* cov T2 - T2 V'_R(T2)+."""
    calc = cfg.calc
    conn = cfg.connection
    V = cfg.potential
    left = right = None
    if cfg.left is not None:
        a = cfg.left.p
        box = cov_codifferential(conn, cov_derivative(conn, cfg.left)).form.component(())
        r1 = box - dagger(V.derivative(section_inner(cfg.left, cfg.left))) @ a
        left = QvbForm(cfg.left.charge, "left", calc.scalar_form(r1))
    if cfg.right is not None:
        b = cfg.right.p
        box = cov_codifferential(conn, cov_derivative(conn, cfg.right)).form.component(())
        r2 = box - b @ dagger(V.derivative(section_inner(cfg.right, cfg.right)))
        right = QvbForm(cfg.right.charge, "right", calc.scalar_form(r2))
    return left, right


def continuity_residual(conn):
    """The covariant codifferential applied twice to the curvature, with
    the (identically zero) curvature-transport corrections kept in place."""
    sw = s_omega(conn).adjoint()
    psi = QvbForm(0, "left", conn.curvature())
    first = cov_codifferential(conn, psi) - sw(psi)
    second = cov_codifferential(conn, first) - sw(first)
    return second.form


# -- variational oracles ----------------------------------------------------

def action_gradient_fd(cfg, direction, step=1e-6):
    """Wirtinger derivative d/dz of the total action along the direction,
    by central differences in the real and imaginary parts."""
    if step <= 0:
        raise ValueError("step must be positive")

    def S(z):
        return complex(ymsm_action(shifted(cfg, direction, z)))

    d_re = (S(step) - S(-step)) / (2 * step)
    d_im = (S(1j * step) - S(-1j * step)) / (2 * step)
    return 0.5 * (d_re - 1j * d_im)


def analytic_gradient(cfg, direction):
    """The same derivative from the assembled field equations."""
    calc = cfg.calc
    sc = calc.scalars
    if direction.kind == "connection":
        if cfg.charge != 0 and cfg.has_sections:
            G = ymsm_connection_residual(cfg) * sc.frac(1, 4)
        else:
            G = ym_residual(cfg.connection) * sc.frac(-1, 2)
        return hodge_inner(direction.value, G, "left")
    r1, r2 = ymsm_section_residuals(cfg)
    if direction.kind == "left":
        u = calc.scalar_form(calc.matrix(direction.value))
        return sc.frac(1, 4) * hodge_inner(u, r1.form, "left")
    v = calc.scalar_form(calc.matrix(direction.value))
    return sc.frac(-1, 4) * hodge_inner(r2.form, v, "right")


# -- flatness -----------------------------------------------------------

def flat_potential(conn):
    """Least-squares p with dp = A; returns (p, defect norm).

    The first cohomology of this calculus is trivial, so the defect is
    zero exactly when A is flat.
    """
    calc = conn.calc
    D0 = operator_matrix(calc, lambda f: f.d(), [0], [1])
    target = form_to_vec(conn.A, [1])
    x, *_ = np.linalg.lstsq(D0, target, rcond=None)
    defect = float(np.linalg.norm(D0 @ x - target))
    return vec_to_form(calc, x, [0]).component(()), defect


# -- stationary-point solver ----------------------------------------------

@dataclass
class SolverOptions:
    tol: float = 1e-8
    max_iter: int = 100_000
    method: str = "gd"  # "gd" or "gauss_newton"
    fd_step: float = 1e-7
    armijo_c: float = 1e-4
    initial_step: float = 1.0
    vary_connection: bool = True
    vary_left: bool = True
    vary_right: bool = True


@dataclass
class FieldReport:
    actions: dict
    residual_norms: dict
    iterations: int = 0
    converged: bool = True
    method: str = ""
    tolerance: float = 0.0
    gradient_checks: list = field(default_factory=list)
    seed: int | None = None
    conventions_id: str = CONVENTIONS_ID
    notes: str = ""

    def to_dict(self):
        return {
            "actions": self.actions,
            "residual_norms": self.residual_norms,
            "iterations": self.iterations,
            "converged": self.converged,
            "method": self.method,
            "tolerance": self.tolerance,
            "gradient_checks": self.gradient_checks,
            "seed": self.seed,
            "conventions_id": self.conventions_id,
            "notes": self.notes,
        }


class SolverAbort(RuntimeError):
    """Non-finite values inside the line search; the state is unusable."""


def _pair(x):
    x = complex(x)
    return [x.real, x.imag]


def action_summary(cfg):
    ym = complex(ym_action(cfg.connection))
    out = {"ym": _pair(ym)}
    if cfg.has_sections:
        gsm = complex(gsm_action(cfg))
        out["gsm"] = _pair(gsm)
        out["total"] = _pair(ym + gsm)
    else:
        out["total"] = _pair(ym)
    return out


def _frob(m):
    return float(np.linalg.norm(np.asarray(m, dtype=complex)))


def residual_blocks(cfg):
    """Stacked field-equation values, keyed per equation."""
    blocks = {"connection": form_to_vec(ymsm_connection_residual(cfg), [1])}
    if cfg.has_sections:
        r1, r2 = ymsm_section_residuals(cfg)
        if r1 is not None:
            blocks["left"] = np.asarray(r1.form.component(()), dtype=complex).ravel()
        if r2 is not None:
            blocks["right"] = np.asarray(r2.form.component(()), dtype=complex).ravel()
    return blocks


def residual_norms(cfg):
    return {key: float(np.linalg.norm(v)) for key, v in residual_blocks(cfg).items()}


def _residual_vector(cfg):
    blocks = residual_blocks(cfg)
    z = np.concatenate([blocks[k] for k in sorted(blocks)])
    return np.concatenate([z.real, z.imag])


class _Packing:
    """Real-coordinate chart on the varied fields of a configuration."""

    def __init__(self, cfg, options):
        self.cfg = cfg
        calc = cfg.calc
        self.n2 = calc.N * calc.N
        self.blocks = []
        if options.vary_connection:
            self.blocks.append(("connection", calc.dim * self.n2))
        if options.vary_left and cfg.left is not None:
            self.blocks.append(("left", self.n2))
        if options.vary_right and cfg.right is not None:
            self.blocks.append(("right", self.n2))
        self.size = 2 * sum(n for _, n in self.blocks)

    def pack(self, cfg):
        zs = []
        for kind, _ in self.blocks:
            if kind == "connection":
                zs.append(form_to_vec(cfg.connection.A, [1]))
            elif kind == "left":
                zs.append(np.asarray(cfg.left.p, dtype=complex).ravel())
            else:
                zs.append(np.asarray(cfg.right.p, dtype=complex).ravel())
        z = np.concatenate(zs) if zs else np.zeros(0, dtype=complex)
        return np.concatenate([z.real, z.imag])

    def unpack(self, x):
        half = len(x) // 2
        z = x[:half] + 1j * x[half:]
        cfg = self.cfg
        calc = cfg.calc
        pos = 0
        conn, left_p, right_p = None, None, None
        for kind, n in self.blocks:
            chunk = z[pos:pos + n]
            pos += n
            if kind == "connection":
                conn = GaugeConnection(vec_to_form(calc, chunk, [1]))
            elif kind == "left":
                left_p = chunk.reshape(calc.N, calc.N)
            else:
                right_p = chunk.reshape(calc.N, calc.N)
        return cfg.replace(connection=conn, left_p=left_p, right_p=right_p)


def solve_stationary(cfg0, options=None):
    """Descend the squared residual norm to a stationary configuration.

    Returns (configuration, report); divergence and stagnation produce a
    non-converged report, while non-finite line-search values raise
    SolverAbort.
    """
    options = options or SolverOptions()
    if options.method not in ("gd", "gauss_newton"):
        raise ValueError(f"unknown method {options.method!r}")
    packing = _Packing(cfg0, options)
    if packing.size == 0:
        raise ValueError("no fields are varied; nothing to solve")

    def resid(x):
        return _residual_vector(packing.unpack(x))

    def phi(x):
        r = resid(x)
        return float(r @ r), r

    x = packing.pack(cfg0)
    value, r = phi(x)
    if not np.isfinite(value):
        raise SolverAbort("initial configuration has non-finite residuals")
    initial_value = value
    step = options.initial_step
    h = options.fd_step
    iterations = 0
    converged = np.sqrt(value) <= options.tol
    notes = ""
    window = 100  # projection window for the progress-rate guard
    anchor = value

    while not converged and iterations < options.max_iter:
        iterations += 1
        if options.method == "gd":
            grad = np.empty_like(x)
            for i in range(len(x)):
                xp, xm = x.copy(), x.copy()
                xp[i] += h
                xm[i] -= h
                grad[i] = (phi(xp)[0] - phi(xm)[0]) / (2 * h)
            if not np.all(np.isfinite(grad)):
                raise SolverAbort("non-finite gradient in line search setup")
            gnorm2 = float(grad @ grad)
            if gnorm2 == 0.0:
                notes = "zero gradient away from tolerance"
                break
            t = step
            while True:
                trial = x - t * grad
                tval, _ = phi(trial)
                if np.isnan(tval):
                    raise SolverAbort("NaN in line search")
                if tval <= value - options.armijo_c * t * gnorm2:
                    x, value = trial, tval
                    step = min(t * 2.0, 1e6)
                    break
                t *= 0.5
                if t < 1e-18:
                    notes = "line search stagnated"
                    break
            if t < 1e-18:
                break
        else:  # gauss_newton
            m = len(x)
            J = np.empty((len(r), m))
            for i in range(m):
                xp, xm = x.copy(), x.copy()
                xp[i] += h
                xm[i] -= h
                J[:, i] = (resid(xp) - resid(xm)) / (2 * h)
            if not np.all(np.isfinite(J)):
                raise SolverAbort("non-finite Jacobian in line search setup")
            dx, *_ = np.linalg.lstsq(J, -r, rcond=None)
            t = 1.0
            improved = False
            while t >= 1e-18:
                trial = x + t * dx
                tval, tres = phi(trial)
                if np.isnan(tval):
                    raise SolverAbort("NaN in line search")
                if tval < value:
                    x, value, r = trial, tval, tres
                    improved = True
                    break
                t *= 0.5
            if not improved:
                notes = "line search stagnated"
                break
        if value > 1e12 * max(initial_value, 1.0):
            notes = "diverged"
            break
        converged = np.sqrt(value) <= options.tol
        # Stop early when the geometric rate sustained over the last window
        # cannot reach the tolerance within the remaining iteration budget.
        if not converged and iterations % window == 0 and options.tol > 0:
            rate = (value / anchor) ** (1.0 / window) if anchor > 0 else 0.0
            remaining = options.max_iter - iterations
            if rate >= 1.0 or (rate > 0.0 and
                    math.log(value) + remaining * math.log(rate)
                    > 2.0 * math.log(options.tol)):
                notes = "progress rate projects no convergence within the budget"
                break
            anchor = value

    cfg = packing.unpack(x)
    report = FieldReport(
        actions=action_summary(cfg),
        residual_norms=residual_norms(cfg),
        iterations=iterations,
        converged=bool(converged),
        method=options.method,
        tolerance=options.tol,
        notes=notes,
    )
    return cfg, report


def random_configuration(calc, rng, charge=1, potential=None, scale=1.0,
                         with_sections=True):
    conn = GaugeConnection(calc.random_form(1, rng, scale))
    left = right = None
    if with_sections:
        left = ChargedSection(calc, charge, "left", calc.random_matrix(rng, scale))
        right = ChargedSection(calc, -charge, "right", calc.random_matrix(rng, scale))
    return FieldConfiguration(conn, left, right, potential)
