"""Causal types over finite-dimensional quantum systems.

A type is the affine hull of its admissible states on a (possibly
multipartite) Hermitian matrix space, together with the dual hull of
effects pairing to one against every state. All constructors below keep
both hulls flat (they contain a positive multiple of the identity) and
closed under double dualization, which is what makes them compose.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cpmaps import ChoiMap, permute_factors, structural
from .errors import (FlatnessError, InconsistencyError, InvalidDimensionError,
                     MorphismError, ShapeMismatchError)
from .hermspace import (AffineSubspace, check_hermitian, coords_to_herm,
                        herm_to_coords, min_eig, psd_check, vec_identity)
from .tolerances import TOLS


def _norm_factors(dims) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if any(d < 1 for d in dims):
        raise InvalidDimensionError(f"factor dimensions must be positive, got {dims}")
    # trivial factors carry no state space; the unit type has an empty list
    return tuple(d for d in dims if d > 1)


def _prod(dims) -> int:
    out = 1
    for d in dims:
        out *= int(d)
    return out


class CausObject:
    """A causal type: factor layout plus the affine state and effect hulls."""

    def __init__(self, factor_dims, states: AffineSubspace, *,
                 effects: AffineSubspace | None = None, label: str = "obj",
                 dual_of: "CausObject | None" = None):
        self.factor_dims = _norm_factors(factor_dims)
        self.dim = _prod(self.factor_dims)
        if states.matrix_dim != self.dim:
            raise ShapeMismatchError(
                f"state hull lives on dim {states.matrix_dim}, factors give {self.dim}")
        self.states = states
        self._effects = effects
        self.label = label
        lam, resid = states.solve_scalar_identity()
        if not (lam > TOLS.sub) or resid > 1e3 * TOLS.sub * max(1.0, abs(lam)):
            raise FlatnessError(
                f"state hull of {label!r} holds no positive multiple of the identity "
                f"(lam={lam:.3e}, residual={resid:.3e})")
        self.flat_lambda = lam
        self._dual: CausObject | None = None
        if dual_of is not None:
            self._dual = dual_of
            dual_of._dual = self

    @property
    def effects(self) -> AffineSubspace:
        if self._effects is None:
            self._effects = self.states.dual()
        return self._effects

    @property
    def first_order(self) -> bool:
        return self.effects.rank() == 0

    def n_factors(self) -> int:
        return len(self.factor_dims)

    def __repr__(self) -> str:
        return (f"CausObject({self.label}, dim={self.dim}, "
                f"states_rank={self.states.rank()})")


@dataclass
class CausMorphism:
    """A completely positive map checked to send source states into target states."""
    map: ChoiMap
    source: CausObject
    target: CausObject


# -- atomic constructors -----------------------------------------------------

def mk_first_order(d: int, *, label: str | None = None) -> CausObject:
    """The type whose states are all density matrices on a d-level system."""
    d = int(d)
    if d < 1:
        raise InvalidDimensionError(f"system dimension must be >= 1, got {d}")
    iv = vec_identity(d)
    rows = (iv / math.sqrt(d))[None, :]
    vals = np.array([1.0 / math.sqrt(d)])
    states = AffineSubspace.from_constraints(d, rows, vals, orthonormal=True)
    return CausObject((d,), states, label=label or f"FO({d})")


def mk_unit() -> CausObject:
    return mk_first_order(1, label="I")


def mk_classical(n: int) -> CausObject:
    """Diagonal (classical) states on an n-outcome register.

    Not first order for n >= 2: its effect hull has the diagonal directions.
    """
    n = int(n)
    if n < 1:
        raise InvalidDimensionError(f"register size must be >= 1, got {n}")
    if n == 1:
        return mk_first_order(1, label="CLA(1)")
    m = n * n
    iv = vec_identity(n)
    rows = np.concatenate([(iv / math.sqrt(n))[None, :], np.eye(m)[n:]], axis=0)
    vals = np.zeros(rows.shape[0])
    vals[0] = 1.0 / math.sqrt(n)
    states = AffineSubspace.from_constraints(n, rows, vals, orthonormal=True)
    return CausObject((n,), states, label=f"CLA({n})")


def mk_all_states(a: CausObject) -> CausObject:
    """First-order type on the same factors as ``a``: every density matrix."""
    d = a.dim
    iv = vec_identity(d)
    rows = (iv / math.sqrt(d))[None, :]
    vals = np.array([1.0 / math.sqrt(d)])
    states = AffineSubspace.from_constraints(d, rows, vals, orthonormal=True)
    return CausObject(a.factor_dims, states, label=f"|{a.label}|")


# -- connectives -------------------------------------------------------------

def dual_obj(a: CausObject) -> CausObject:
    """Swap the roles of states and effects."""
    if a._dual is not None:
        return a._dual
    return CausObject(a.factor_dims, a.effects, effects=a.states,
                      label=f"{a.label}^", dual_of=a)


_GRID_LIMIT = 250_000


def tensor_obj(a: CausObject, b: CausObject, *, label: str | None = None) -> CausObject:
    """Product type: affine span of products of state-basis points."""
    lab = label or f"({a.label}*{b.label})"
    if a.dim == 1:
        return CausObject(b.factor_dims, b.states, effects=b._effects, label=lab)
    if b.dim == 1:
        return CausObject(a.factor_dims, a.states, effects=a._effects, label=lab)
    pa = a.states.affine_points()
    pb = b.states.affine_points()
    if pa.shape[0] * pb.shape[0] > _GRID_LIMIT:
        raise InvalidDimensionError(
            f"product grid of {pa.shape[0]} x {pb.shape[0]} points is too large")
    ma = coords_to_herm(pa, a.dim)
    mb = coords_to_herm(pb, b.dim)
    d = a.dim * b.dim
    prods = np.einsum('kab,lcd->klacbd', ma, mb).reshape(-1, d, d)
    rows = herm_to_coords(prods)
    states = AffineSubspace.from_span_coords(d, rows[0], rows[1:] - rows[0])
    return CausObject(a.factor_dims + b.factor_dims, states, label=lab)


def par_obj(a: CausObject, b: CausObject, *, label: str | None = None) -> CausObject:
    """De-Morgan dual of the product: dual(tensor(dual a, dual b))."""
    lab = label or f"({a.label}@{b.label})"
    if a.dim == 1:
        return CausObject(b.factor_dims, b.states, effects=b._effects, label=lab)
    if b.dim == 1:
        return CausObject(a.factor_dims, a.states, effects=a._effects, label=lab)
    t = tensor_obj(dual_obj(a), dual_obj(b))
    return CausObject(t.factor_dims, t.effects, effects=t.states,
                      label=lab, dual_of=t)


def hom_obj(a: CausObject, b: CausObject) -> CausObject:
    return par_obj(dual_obj(a), b, label=f"[{a.label},{b.label}]")


def _kron_rows(left_mats: np.ndarray, right: np.ndarray) -> np.ndarray:
    # coordinate rows of kron(L_k, right) for a batch of Hermitian L_k
    k, dl, _ = left_mats.shape
    dr = right.shape[0]
    batch = np.einsum('kab,cd->kacbd', left_mats, right).reshape(k, dl * dr, dl * dr)
    return herm_to_coords(batch)


def seq_obj(a: CausObject, b: CausObject, *, label: str | None = None) -> CausObject:
    """One-way composite: b may depend on a but cannot influence it.

    Cut out of the par hull by linear slice conditions: contracting the
    second block with any effect direction of ``b`` must give zero, and
    contracting with the base effect must land in the state hull of ``a``.
    """
    lab = label or f"({a.label}<{b.label})"
    p = par_obj(a, b)
    if b.first_order or a.dim == 1 or b.dim == 1:
        # no effect directions to test; the composite collapses to par
        return CausObject(p.factor_dims, p.states, effects=p._effects, label=lab)
    basis_a = coords_to_herm(np.eye(a.dim * a.dim), a.dim)
    eff = b.effects
    dir_mats = coords_to_herm(eff.dirs_coords(), b.dim)
    rows = [_kron_rows(basis_a, e) for e in dir_mats]
    vals = [np.zeros(r.shape[0]) for r in rows]
    acons, avals = a.states.cons_rows()
    base_mat = coords_to_herm(eff.base_vec(), b.dim)
    rows.append(_kron_rows(coords_to_herm(acons, a.dim), base_mat))
    vals.append(avals)
    states = p.states.intersect_linear(np.vstack(rows), np.concatenate(vals))
    return CausObject(p.factor_dims, states, label=lab)


# -- membership and morphisms -------------------------------------------------

def member(obj: CausObject, mat: np.ndarray, tol: float | None = None) -> bool:
    """Is ``mat`` a state of ``obj``: positive semidefinite and on the hull."""
    mat = check_hermitian(mat, tol=max(TOLS.herm, tol or TOLS.sub))
    if mat.shape[0] != obj.dim:
        raise ShapeMismatchError(
            f"state of dim {mat.shape[0]} offered to type of dim {obj.dim}")
    return psd_check(mat, tol) and obj.states.contains(mat, tol)


def membership_report(obj: CausObject, mat: np.ndarray,
                      tol: float | None = None) -> dict:
    mat = check_hermitian(mat, tol=max(TOLS.herm, tol or TOLS.sub))
    if mat.shape[0] != obj.dim:
        raise ShapeMismatchError(
            f"state of dim {mat.shape[0]} offered to type of dim {obj.dim}")
    me = min_eig(mat)
    dist = obj.states.distance(herm_to_coords(mat))
    return {
        "member": bool(psd_check(mat, tol) and obj.states.contains(mat, tol)),
        "min_eigenvalue": me,
        "affine_distance": dist,
        "first_order": obj.first_order,
        "flat_lambda": obj.flat_lambda,
    }


def check_morphism(f: ChoiMap, a: CausObject, b: CausObject,
                   tol: float | None = None) -> CausMorphism:
    """Validate ``f`` as a map of types; CP and hull failures report separately."""
    tol = TOLS.sub if tol is None else tol
    if f.d_in != a.dim or f.d_out != b.dim:
        raise ShapeMismatchError(
            f"map has shape {f.d_in}->{f.d_out}, types have {a.dim}->{b.dim}")
    me = min_eig(f.J)
    if me < -max(TOLS.psd, tol) * max(1.0, float(np.linalg.norm(f.J))):
        raise MorphismError(
            f"map is not completely positive (min Choi eigenvalue {me:.3e})",
            reason="cp", residual=-me)
    mats = coords_to_herm(a.states.affine_points(), a.dim)
    j4 = f.J.reshape(f.d_out, f.d_in, f.d_out, f.d_in)
    outs = np.einsum('tsuv,ksv->ktu', j4, mats)
    coords = herm_to_coords(outs)
    dists = b.states.distances(coords)
    scales = np.maximum(1.0, np.linalg.norm(coords, axis=1))
    worst = float(np.max(dists / scales)) if dists.size else 0.0
    if worst > tol:
        raise MorphismError(
            f"map sends some source states off the target hull "
            f"(worst relative distance {worst:.3e})",
            reason="affine", residual=worst)
    return CausMorphism(map=f, source=a, target=b)


def cup_state(d: int) -> np.ndarray:
    """Unnormalized maximally entangled state matrix on a doubled system."""
    return structural("cup", d).J


def alpha_scalar(a: CausObject, *, verify: bool = True,
                 tol: float | None = None) -> float:
    """Scaling that makes the entangled pair a state of ``a`` paired with all states."""
    alpha = a.flat_lambda
    if verify:
        p = par_obj(a, mk_all_states(a))
        if not member(p, alpha * cup_state(a.dim), tol):
            raise InconsistencyError(
                f"no consistent pair-state scaling for {a.label!r}")
    return alpha


# -- large-composite membership ----------------------------------------------

def matricize(x: np.ndarray, d_left: int, d_right: int) -> np.ndarray:
    """Coordinate block matrix C[i, j] = <B_i (x) B_j, x> of a bipartite state.

    Stays at block-sized ambient dimensions, so membership tests on big
    composites never touch the full product coordinate space.
    """
    basis_l = coords_to_herm(np.eye(d_left * d_left), d_left)
    x4 = x.reshape(d_left, d_right, d_left, d_right)
    red = np.einsum('kab,buav->kuv', basis_l, x4)
    return herm_to_coords(red)


def _partial_effect(x: np.ndarray, e: np.ndarray, d_left: int, d_right: int) -> np.ndarray:
    # contract the right block with effect e, leaving a matrix on the left block
    x4 = x.reshape(d_left, d_right, d_left, d_right)
    return np.einsum('bc,acrb->ar', e, x4)


def par_member(x: np.ndarray, a: CausObject, b: CausObject,
               tol: float | None = None, *, require_psd: bool = True) -> bool:
    """Membership in the par composite without building the composite type."""
    tol = TOLS.sub if tol is None else tol
    x = check_hermitian(x, tol=max(TOLS.herm, tol))
    if x.shape[0] != a.dim * b.dim:
        raise ShapeMismatchError("state dimension does not match the composite")
    if require_psd and not psd_check(x, tol):
        return False
    if a.dim == 1:
        return b.states.contains(x, tol)
    if b.dim == 1:
        return a.states.contains(x, tol)
    c = matricize(x, a.dim, b.dim)
    pe = a.effects.affine_points()
    qe = b.effects.affine_points()
    pair = pe @ c @ qe.T
    scale = max(1.0, float(np.linalg.norm(x)))
    return float(np.max(np.abs(pair - 1.0))) <= tol * scale


def seq_member(x: np.ndarray, a: CausObject, b: CausObject,
               tol: float | None = None, *, require_psd: bool = True) -> bool:
    """Membership in the one-way composite without building the composite type."""
    tol = TOLS.sub if tol is None else tol
    x = check_hermitian(x, tol=max(TOLS.herm, tol))
    if x.shape[0] != a.dim * b.dim:
        raise ShapeMismatchError("state dimension does not match the composite")
    if require_psd and not psd_check(x, tol):
        return False
    if not par_member(x, a, b, tol, require_psd=False):
        return False
    if b.first_order or a.dim == 1 or b.dim == 1:
        return True
    scale = max(1.0, float(np.linalg.norm(x)))
    c = matricize(x, a.dim, b.dim)
    cb, _ = b.effects.cons_rows()
    resid = c - (c @ cb.T) @ cb
    if float(np.linalg.norm(resid)) > tol * scale:
        return False
    base_mat = coords_to_herm(b.effects.base_vec(), b.dim)
    pe = _partial_effect(x, base_mat, a.dim, b.dim)
    return a.states.contains_vec(herm_to_coords(pe), tol)


def interchange_check(a_state: np.ndarray, a: CausObject, b: CausObject,
                      c_state: np.ndarray, c: CausObject, d: CausObject,
                      tol: float | None = None) -> bool:
    """Product of one-way states, reordered by parties, stays one-way."""
    dims = a.factor_dims + b.factor_dims + c.factor_dims + d.factor_dims
    prod = np.kron(a_state, c_state)
    na, nb, nc, nd = (o.n_factors() for o in (a, b, c, d))
    perm = (list(range(na))
            + list(range(na + nb, na + nb + nc))
            + list(range(na, na + nb))
            + list(range(na + nb + nc, na + nb + nc + nd)))
    if dims:
        prod = permute_factors(prod, dims, perm)
    t_ac = tensor_obj(a, c)
    t_bd = tensor_obj(b, d)
    return seq_member(prod, t_ac, t_bd, tol)


def objects_equal(a: CausObject, b: CausObject, tol: float | None = None) -> bool:
    return a.dim == b.dim and a.states.equals(b.states, tol)


# -- bridges between process matrices and hom states ---------------------------

def _choi_dims(dims) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims if int(d) > 1)
    return dims if dims else (1,)


def state_of_choi(cm: ChoiMap) -> np.ndarray:
    """Reorder a process matrix to hom-state layout (input block first)."""
    return permute_factors(cm.J, (cm.d_out, cm.d_in), [1, 0])


def choi_of_state(mat: np.ndarray, in_dims, out_dims, *,
                  validate: bool = False) -> ChoiMap:
    in_dims = _choi_dims(in_dims)
    out_dims = _choi_dims(out_dims)
    di = _prod(in_dims)
    do = _prod(out_dims)
    if mat.shape[0] != di * do:
        raise ShapeMismatchError(
            f"state dim {mat.shape[0]} does not match {di} -> {do}")
    j = permute_factors(mat, (di, do), [1, 0])
    return ChoiMap(out_dims, in_dims, j, validate=validate)
