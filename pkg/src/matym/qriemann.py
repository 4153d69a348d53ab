"""Riemannian structure on matrix-valued forms.

Volume form, the left/right metric family, the normalized-trace integral,
Hodge stars, codifferentials, Laplace-de Rham operators and their spectra.
The left metric is antilinear in its second slot, the right metric in its
first; everything right-sided is obtained by conjugating the left-sided
operator with the involution, never by a second hand-coded formula.
"""

from __future__ import annotations

import csv

import numpy as np
import scipy.linalg

from .matforms import DiffForm, dagger, sort_sign

IDENTITY_TOL = 1e-12
ADJOINT_TOL = 1e-10
PSD_SLACK = 1e-9

_SIDES = ("left", "right")


class GradeError(ValueError):
    """Operation applied to a form of the wrong grade."""


def _check_side(side):
    if side not in _SIDES:
        raise ValueError(f"side must be one of {_SIDES}, got {side!r}")


def state(p):
    """The faithful state s = tr/N."""
    return np.trace(p) / p.shape[0]


def metric(a, b, side="left"):
    """Matrix-valued metric; components of different grade are orthogonal."""
    _check_side(side)
    a._check_compatible(b)
    out = a.calc.zero_matrix()
    for I, p in a.terms.items():
        q = b.terms.get(I)
        if q is None:
            continue
        out = out + (p @ dagger(q) if side == "left" else dagger(p) @ q)
    return out


def integral(a):
    """Integral of a top-grade form p.dvol, namely s(p)."""
    top = a.calc.volume_indices
    for I in a.terms:
        if I != top:
            raise GradeError(f"integral needs a grade-{a.calc.dim} form, "
                             f"found component h^{I}")
    return state(a.component(top))


def hodge_inner(a, b, side="left"):
    """Scalar inner product, the state applied to the metric."""
    return state(metric(a, b, side))


def hodge(a, side="left"):
    """Hodge star; antilinear, sends grade k to d - k."""
    _check_side(side)
    if side == "right":
        return hodge(a.star(), "left").star()
    calc = a.calc
    full = frozenset(range(1, calc.dim + 1))
    out = {}
    for I, p in a.terms.items():
        Ic = tuple(sorted(full.difference(I)))
        _, sign = sort_sign(I + Ic)
        q = dagger(p)
        out[Ic] = q if sign == 1 else -q
    return DiffForm._raw(calc, out)


def hodge_inv(a, side="left"):
    _check_side(side)
    if side == "right":
        return hodge_inv(a.star(), "left").star()
    calc = a.calc
    full = frozenset(range(1, calc.dim + 1))
    out = {}
    for J, q in a.terms.items():
        Jc = tuple(sorted(full.difference(J)))
        _, sign = sort_sign(Jc + J)
        p = dagger(q)
        out[Jc] = p if sign == 1 else -p
    return DiffForm._raw(calc, out)


def codifferential(a, side="left"):
    """Adjoint of d: (-1)^g star^{-1} d star on each grade-g piece.

    Grade 0 needs no special case; the star of a grade-0 form is a top
    form, which d kills.
    """
    _check_side(side)
    if side == "right":
        return codifferential(a.star(), "left").star()
    calc = a.calc
    out = calc.zero_form()
    for g in a.grades():
        part = hodge_inv(hodge(a.graded_part(g)).d())
        out = out + (part if g % 2 == 0 else -part)
    return out


def laplacian(a, side="left"):
    """Laplace-de Rham operator d d^star + d^star d; grade preserving."""
    return codifferential(a.d(), side) + codifferential(a, side).d()


# -- matrix representations and spectra ---------------------------------

def grade_basis(calc, grades):
    """Standard basis h^I E_rc over the given grades, in vec order."""
    if isinstance(grades, int):
        grades = [grades]
    basis = []
    for g in grades:
        for I in calc.basis_indices(g):
            for r in range(calc.N):
                for c in range(calc.N):
                    m = calc.zero_matrix()
                    m[r, c] = calc.scalars.one
                    basis.append(DiffForm(calc, {I: m}))
    return basis


def form_to_vec(a, grades):
    if isinstance(grades, int):
        grades = [grades]
    calc = a.calc
    allowed = set(grades)
    for I in a.terms:
        if len(I) not in allowed:
            raise GradeError(f"component h^{I} outside grades {sorted(allowed)}")
    blocks = []
    for g in grades:
        for I in calc.basis_indices(g):
            blocks.append(np.asarray(a.component(I), dtype=complex).ravel())
    return np.concatenate(blocks) if blocks else np.zeros(0, dtype=complex)


def vec_to_form(calc, vec, grades):
    if isinstance(grades, int):
        grades = [grades]
    terms = {}
    pos = 0
    n2 = calc.N * calc.N
    for g in grades:
        for I in calc.basis_indices(g):
            terms[I] = np.asarray(vec[pos:pos + n2], dtype=complex).reshape(calc.N, calc.N)
            pos += n2
    if pos != len(vec):
        raise ValueError(f"vector length {len(vec)} does not match grades {grades}")
    return DiffForm(calc, terms)


def operator_matrix(calc, op, grades_in, grades_out=None):
    """Complex matrix of a C-linear operator in the standard form basis."""
    if grades_out is None:
        grades_out = grades_in
    basis = grade_basis(calc, grades_in)
    cols = [form_to_vec(op(b), grades_out) for b in basis]
    rows = len(cols[0]) if cols else 0
    return np.column_stack(cols) if cols else np.zeros((rows, 0), dtype=complex)


def gram_matrices(calc, grade, side="left", operator=None):
    """(H, G) with H_ij = <op b_j, b_i> and G_ij = <b_j, b_i>.

    In the h^I E_rc basis both inner products have Gram matrix Id/N, so H
    is the coefficient matrix of the operator scaled by 1/N (conjugated
    entrywise on the right side, whose inner product is antilinear in the
    first slot).
    """
    _check_side(side)
    if operator is None:
        operator = lambda f: laplacian(f, side)
    M = operator_matrix(calc, operator, grade)
    H = M / calc.N if side == "left" else M.conj() / calc.N
    G = np.eye(M.shape[0]) / calc.N
    return H, G


def spectrum(calc, grade, side="left"):
    """Ascending real eigenvalues of the Laplacian on grade-k forms."""
    H, G = gram_matrices(calc, grade, side)
    if H.shape[0] == 0:
        return np.zeros(0)
    herm_defect = np.max(np.abs(H - H.conj().T))
    if herm_defect > 1e-9:
        raise ValueError(f"Laplacian Gram matrix not hermitian (defect {herm_defect:.3e})")
    return scipy.linalg.eigvalsh(H, G)


def write_spectrum_csv(calc, stream, side="left"):
    """All grades 0..d, columns (grade, index, eigenvalue), 17 digits."""
    writer = csv.writer(stream)
    writer.writerow(["grade", "index", "eigenvalue"])
    for g in range(calc.dim + 1):
        for idx, val in enumerate(spectrum(calc, g, side)):
            writer.writerow([g, idx, f"{val:.17g}"])
