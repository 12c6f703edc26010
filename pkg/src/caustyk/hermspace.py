"""Real-coordinate model of Hermitian matrix space and affine-subspace duality.

Hermitian ``n x n`` matrices form a real inner-product space of dimension
``n**2`` under ``<X, Y> = Tr(X Y)``. Everything downstream represents state and
effect sets as affine subspaces of that coordinate space, so the conversions
here are the numerical bedrock of the package.

Basis ordering is fixed once and for all: the ``n`` diagonal units first, then
the symmetric pairs ``(E_ij + E_ji)/sqrt(2)`` for ``i < j`` in lexicographic
order, then the antisymmetric pairs ``i(E_ji - E_ij)/sqrt(2)`` in the same
order.

An :class:`AffineSubspace` is held in *span form* (a minimum-norm base point
plus orthonormal directions) or in *constraint form* (``{x : A x = c}`` with
orthonormal rows), whichever its construction produced. The dual of a span
form is a constraint form and vice versa, so iterated duals never materialize
a near-full-rank basis; conversion between the two forms of the *same*
subspace is the only expensive path and is done lazily.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .errors import (
    EmptyDualError,
    FlatnessError,
    HermiticityError,
    InconsistencyError,
    InvalidDimensionError,
    ShapeMismatchError,
)
from .tolerances import TOLS

_SQRT2 = np.sqrt(2.0)


# ---------------------------------------------------------------------------
# coordinates
# ---------------------------------------------------------------------------

def check_dimension(n: int) -> int:
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise InvalidDimensionError(f"matrix dimension must be a positive integer, got {n!r}")
    return int(n)


def check_hermitian(mat: np.ndarray, tol: float | None = None) -> np.ndarray:
    """Validate Hermiticity and return the matrix as a complex array."""
    mat = np.asarray(mat, dtype=complex)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ShapeMismatchError(f"expected a square matrix, got shape {mat.shape}")
    tol = TOLS.herm if tol is None else tol
    dev = np.max(np.abs(mat - mat.conj().T)) if mat.size else 0.0
    scale = max(float(np.max(np.abs(mat))) if mat.size else 0.0, 1.0)
    if dev > tol * scale:
        raise HermiticityError(f"matrix deviates from Hermiticity by {dev:.3e}")
    return mat


def herm_to_coords(mats: np.ndarray) -> np.ndarray:
    """Map Hermitian matrices ``(..., n, n)`` to real coordinates ``(..., n**2)``."""
    mats = np.asarray(mats, dtype=complex)
    n = mats.shape[-1]
    iu, ju = np.triu_indices(n, k=1)
    diag = np.real(np.diagonal(mats, axis1=-2, axis2=-1))
    re = _SQRT2 * np.real(mats[..., iu, ju])
    im = -_SQRT2 * np.imag(mats[..., iu, ju])
    return np.concatenate([diag, re, im], axis=-1)


def coords_to_herm(coords: np.ndarray, n: int) -> np.ndarray:
    """Inverse of :func:`herm_to_coords` for coordinates ``(..., n**2)``."""
    coords = np.asarray(coords, dtype=float)
    if coords.shape[-1] != n * n:
        raise ShapeMismatchError(
            f"coordinate length {coords.shape[-1]} does not match dimension {n}")
    k = n * (n - 1) // 2
    iu, ju = np.triu_indices(n, k=1)
    diag = coords[..., :n]
    re = coords[..., n:n + k] / _SQRT2
    im = -coords[..., n + k:] / _SQRT2
    out = np.zeros(coords.shape[:-1] + (n, n), dtype=complex)
    idx = np.arange(n)
    out[..., idx, idx] = diag
    out[..., iu, ju] = re + 1j * im
    out[..., ju, iu] = re - 1j * im
    return out


def herm_basis(n: int) -> list[np.ndarray]:
    """Orthonormal basis of Hermitian ``n x n`` matrices in the fixed order."""
    n = check_dimension(n)
    eye = np.eye(n * n)
    return list(coords_to_herm(eye, n))


def vec_identity(n: int) -> np.ndarray:
    """Coordinates of the identity matrix."""
    v = np.zeros(n * n)
    v[:n] = 1.0
    return v


# ---------------------------------------------------------------------------
# spectra
# ---------------------------------------------------------------------------

def min_eig(mat: np.ndarray) -> float:
    """Smallest eigenvalue of a Hermitian matrix (input symmetrized)."""
    mat = np.asarray(mat, dtype=complex)
    return float(np.linalg.eigvalsh((mat + mat.conj().T) / 2.0)[0])


def psd_check(mat: np.ndarray, tol: float | None = None) -> bool:
    """Whether the matrix is positive semidefinite within tolerance."""
    tol = TOLS.psd if tol is None else tol
    mat = check_hermitian(mat, tol=max(tol, TOLS.herm))
    scale = max(float(np.max(np.abs(mat))) if mat.size else 0.0, 1.0)
    return min_eig(mat) >= -tol * scale


# ---------------------------------------------------------------------------
# linear subspaces
# ---------------------------------------------------------------------------

def _orthonormalize(rows: np.ndarray, m: int) -> np.ndarray:
    """Orthonormal row basis for the row space of ``rows``; may be empty."""
    rows = np.asarray(rows, dtype=float).reshape(-1, m)
    if rows.shape[0] == 0:
        return np.zeros((0, m))
    u, s, vt = np.linalg.svd(rows, full_matrices=False)
    cut = TOLS.rank_cut(s[0]) if s.size else 0.0
    return vt[s > cut]


class LinearSubspace:
    """A linear subspace of Hermitian coordinate space.

    Attributes:
        matrix_dim: the underlying matrix dimension ``n``.
        coords: orthonormal basis rows, shape ``(rank, n**2)``.
    """

    def __init__(self, matrix_dim: int, coords: np.ndarray, *, orthonormal: bool = False):
        self.matrix_dim = check_dimension(matrix_dim)
        m = self.matrix_dim ** 2
        coords = np.asarray(coords, dtype=float).reshape(-1, m)
        if not orthonormal:
            coords = _orthonormalize(coords, m)
        else:
            gram = coords @ coords.T
            if coords.shape[0] and np.max(np.abs(gram - np.eye(coords.shape[0]))) > 1e-8:
                raise InconsistencyError("claimed-orthonormal basis rows are not orthonormal")
        self.coords = coords

    @property
    def rank(self) -> int:
        return self.coords.shape[0]

    @property
    def ambient_dim(self) -> int:
        return self.matrix_dim ** 2

    def basis(self) -> list[np.ndarray]:
        """Basis as a list of Hermitian matrices."""
        return list(coords_to_herm(self.coords, self.matrix_dim))

    def project(self, x: np.ndarray) -> np.ndarray:
        return self.coords.T @ (self.coords @ x) if self.rank else np.zeros_like(x)

    def contains_vec(self, x: np.ndarray, tol: float | None = None) -> bool:
        tol = TOLS.sub if tol is None else tol
        resid = float(np.linalg.norm(x - self.project(x)))
        return resid <= tol * max(float(np.linalg.norm(x)), 1.0)


def span(mats, tol: float | None = None) -> LinearSubspace:
    """Orthonormal span of a list of Hermitian matrices.

    Rank decisions keep singular values above ``tol * max(sigma_max, 1)``.
    """
    mats = list(mats)
    if not mats:
        raise InvalidDimensionError("span() of an empty list has no ambient dimension; "
                                    "construct LinearSubspace(n, []) directly")
    n = np.asarray(mats[0]).shape[0]
    arr = np.stack([check_hermitian(m) for m in mats])
    if arr.shape[1] != n or any(np.asarray(m).shape != (n, n) for m in mats):
        raise ShapeMismatchError("span() requires matrices of a single dimension")
    coords = herm_to_coords(arr)
    u, s, vt = np.linalg.svd(coords, full_matrices=False)
    tol = TOLS.sub if tol is None else tol
    cut = tol * max(float(s[0]) if s.size else 0.0, 1.0)
    return LinearSubspace(n, vt[s > cut], orthonormal=True)


# ---------------------------------------------------------------------------
# affine subspaces
# ---------------------------------------------------------------------------

class AffineSubspace:
    """Affine subspace of Hermitian coordinate space with dual-form storage.

    Span form: ``{base + directions^T t}`` with ``base`` the minimum-norm point
    (so ``base`` is orthogonal to the directions) and orthonormal direction
    rows. Constraint form: ``{x : cons @ x = vals}`` with orthonormal
    constraint rows. At least one form is always present; the other is derived
    on demand and cached.
    """

    def __init__(self, matrix_dim: int, *, base: np.ndarray | None = None,
                 dirs: np.ndarray | None = None, cons: np.ndarray | None = None,
                 vals: np.ndarray | None = None):
        self.matrix_dim = check_dimension(matrix_dim)
        self._m = self.matrix_dim ** 2
        self._base = base
        self._dirs = dirs
        self._cons = cons
        self._vals = vals
        if base is None and cons is None:
            raise InconsistencyError("AffineSubspace needs span or constraint data")

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_span(cls, base_mat: np.ndarray, dir_mats) -> "AffineSubspace":
        """Build from a base-point matrix and direction matrices (canonicalized)."""
        base_mat = check_hermitian(base_mat)
        n = base_mat.shape[0]
        dir_list = [check_hermitian(d) for d in dir_mats]
        if any(d.shape != (n, n) for d in dir_list):
            raise ShapeMismatchError("direction matrices must match the base dimension")
        dirs = _orthonormalize(
            herm_to_coords(np.stack(dir_list)) if dir_list else np.zeros((0, n * n)), n * n)
        base = herm_to_coords(base_mat)
        base = base - dirs.T @ (dirs @ base) if dirs.shape[0] else base
        return cls(n, base=base, dirs=dirs)

    @classmethod
    def from_span_coords(cls, matrix_dim: int, base: np.ndarray, dirs: np.ndarray,
                         *, canonical: bool = False) -> "AffineSubspace":
        m = matrix_dim * matrix_dim
        dirs = np.asarray(dirs, dtype=float).reshape(-1, m)
        base = np.asarray(base, dtype=float).reshape(m)
        if not canonical:
            dirs = _orthonormalize(dirs, m)
            if dirs.shape[0]:
                base = base - dirs.T @ (dirs @ base)
        return cls(matrix_dim, base=base.copy(), dirs=dirs)

    @classmethod
    def from_point(cls, mat: np.ndarray) -> "AffineSubspace":
        mat = check_hermitian(mat)
        n = mat.shape[0]
        return cls(n, base=herm_to_coords(mat), dirs=np.zeros((0, n * n)))

    @classmethod
    def from_constraints(cls, matrix_dim: int, rows: np.ndarray, vals: np.ndarray,
                         *, orthonormal: bool = False) -> "AffineSubspace":
        """Build ``{x : rows @ x = vals}``; raises if the system is inconsistent."""
        m = matrix_dim * matrix_dim
        rows = np.asarray(rows, dtype=float).reshape(-1, m)
        vals = np.asarray(vals, dtype=float).reshape(-1)
        if rows.shape[0] != vals.shape[0]:
            raise ShapeMismatchError("constraint rows and values disagree in count")
        if orthonormal:
            return cls(matrix_dim, cons=rows, vals=vals)
        if rows.shape[0] == 0:
            return cls(matrix_dim, cons=np.zeros((0, m)), vals=np.zeros(0))
        u, s, vt = np.linalg.svd(rows, full_matrices=False)
        cut = TOLS.rank_cut(float(s[0]) if s.size else 0.0)
        keep = s > cut
        proj_vals = u.T @ vals
        drop_resid = float(np.linalg.norm(proj_vals[~keep])) if (~keep).any() else 0.0
        # remaining rows of the original system must also be consistent
        recon = (u[:, keep] * s[keep]) @ (proj_vals[keep] / s[keep])
        drop_resid = max(drop_resid, float(np.linalg.norm(recon - vals)))
        if drop_resid > TOLS.sub * max(float(np.linalg.norm(vals)), 1.0) * 1e3:
            raise InconsistencyError(
                f"inconsistent affine constraint system (residual {drop_resid:.3e})")
        return cls(matrix_dim, cons=vt[keep], vals=proj_vals[keep] / s[keep])

    # -- basic data --------------------------------------------------------

    @property
    def ambient_dim(self) -> int:
        return self._m

    def rank(self) -> int:
        if self._dirs is not None:
            return self._dirs.shape[0]
        return self._m - self._cons.shape[0]

    def base_vec(self) -> np.ndarray:
        """Minimum-norm point of the subspace (canonical base)."""
        if self._base is not None:
            return self._base
        return self._cons.T @ self._vals

    def base_matrix(self) -> np.ndarray:
        return coords_to_herm(self.base_vec(), self.matrix_dim)

    def dirs_coords(self) -> np.ndarray:
        """Orthonormal direction rows; materializes the span form if needed."""
        if self._dirs is None:
            self._dirs = scipy.linalg.null_space(self._cons).T \
                if self._cons.shape[0] else np.eye(self._m)
            self._base = self.base_vec()
        return self._dirs

    def direction_matrices(self) -> list[np.ndarray]:
        return list(coords_to_herm(self.dirs_coords(), self.matrix_dim))

    def direction_space(self) -> LinearSubspace:
        return LinearSubspace(self.matrix_dim, self.dirs_coords(), orthonormal=True)

    def has_span(self) -> bool:
        return self._dirs is not None

    def has_cons(self) -> bool:
        return self._cons is not None

    def cons_rows(self) -> tuple[np.ndarray, np.ndarray]:
        """Orthonormal constraint rows and values; may materialize a complement."""
        if self._cons is None:
            if self._dirs.shape[0]:
                rows = scipy.linalg.null_space(self._dirs).T
            else:
                rows = np.eye(self._m)
            self._cons = rows
            self._vals = rows @ self._base
        return self._cons, self._vals

    def affine_points(self) -> np.ndarray:
        """An affine basis of the subspace: base plus base+direction rows."""
        b = self.base_vec()
        d = self.dirs_coords()
        return np.concatenate([b[None, :], b[None, :] + d], axis=0)

    # -- geometry ----------------------------------------------------------

    def project_vec(self, x: np.ndarray) -> np.ndarray:
        if self._dirs is not None:
            b = self._base
            y = x - b
            return b + (self._dirs.T @ (self._dirs @ y) if self._dirs.shape[0] else 0.0)
        return x - self._cons.T @ (self._cons @ x - self._vals)

    def distance(self, x: np.ndarray) -> float:
        if self._cons is not None:
            return float(np.linalg.norm(self._cons @ x - self._vals))
        return float(np.linalg.norm(x - self.project_vec(x)))

    def distances(self, xs: np.ndarray) -> np.ndarray:
        """Per-row distances for a batch of coordinate vectors, shape (k, m)."""
        xs = np.asarray(xs, dtype=float)
        if self._cons is not None:
            return np.linalg.norm(xs @ self._cons.T - self._vals, axis=1)
        y = xs - self._base
        if self._dirs.shape[0]:
            y = y - (y @ self._dirs.T) @ self._dirs
        return np.linalg.norm(y, axis=1)

    def contains_vec(self, x: np.ndarray, tol: float | None = None) -> bool:
        tol = TOLS.sub if tol is None else tol
        return self.distance(x) <= tol * max(float(np.linalg.norm(x)), 1.0)

    def contains(self, mat: np.ndarray, tol: float | None = None) -> bool:
        mat = check_hermitian(mat, tol=max(TOLS.herm, (tol or TOLS.sub)))
        if mat.shape[0] != self.matrix_dim:
            raise ShapeMismatchError(
                f"matrix dim {mat.shape[0]} does not match subspace dim {self.matrix_dim}")
        return self.contains_vec(herm_to_coords(mat), tol)

    def dual(self) -> "AffineSubspace":
        """The affine set pairing to 1 against every point of this one.

        For span form ``(b, D)`` this is the constraint system
        ``{x : <b, x> = 1, D x = 0}``; for constraint form ``(A, c)`` it is
        ``{A^T u : <c, u> = 1}``. Raises :class:`EmptyDualError` when the
        subspace passes through the origin (non-flat input).
        """
        if self._dirs is not None:
            b = self._base
            nb = float(np.linalg.norm(b))
            if nb <= TOLS.sub * 10:
                raise EmptyDualError("subspace passes through the origin; dual is empty")
            rows = np.concatenate([b[None, :] / nb, self._dirs], axis=0)
            vals = np.zeros(rows.shape[0])
            vals[0] = 1.0 / nb
            return AffineSubspace(self.matrix_dim, cons=rows, vals=vals)
        A, c = self._cons, self._vals
        nc = float(np.linalg.norm(c))
        if nc <= TOLS.sub * 10:
            raise EmptyDualError("subspace passes through the origin; dual is empty")
        if A.shape[0] == 1:
            u_dirs = np.zeros((0, 1))
        else:
            u_dirs = scipy.linalg.null_space(c[None, :] / nc).T
        base = A.T @ (c / nc ** 2)
        dirs = u_dirs @ A
        return AffineSubspace(self.matrix_dim, base=base, dirs=dirs)

    # -- relations ---------------------------------------------------------

    def is_subset(self, other: "AffineSubspace", tol: float | None = None) -> bool:
        tol = TOLS.sub if tol is None else tol
        if self.matrix_dim != other.matrix_dim:
            raise ShapeMismatchError("subspaces live on different matrix dimensions")
        if self.rank() > other.rank():
            return False
        # pick the orientation that avoids materializing a large basis
        if self._dirs is None and other._dirs is None:
            return other.dual().is_subset(self.dual(), tol)
        if self._dirs is None and self.rank() > self._m // 2:
            return other.dual().is_subset(self.dual(), tol)
        if not other.contains_vec(self.base_vec(), tol):
            return False
        d = self.dirs_coords()
        if d.shape[0] == 0:
            return True
        if other._cons is not None:
            resid = float(np.max(np.abs(other._cons @ d.T))) if other._cons.shape[0] else 0.0
        else:
            od = other._dirs
            resid = float(np.max(np.abs(d - (d @ od.T) @ od))) if od.shape[0] else \
                float(np.max(np.abs(d)))
        return resid <= tol * 10

    def equals(self, other: "AffineSubspace", tol: float | None = None) -> bool:
        return self.rank() == other.rank() and self.is_subset(other, tol) \
            and other.contains_vec(self.base_vec(), TOLS.sub if tol is None else tol)

    # -- specialized operations --------------------------------------------

    def solve_scalar_identity(self) -> tuple[float, float]:
        """The scalar ``lam`` with ``lam * I`` on the subspace, plus residual."""
        i = vec_identity(self.matrix_dim)
        if self._cons is not None:
            a = self._cons @ i
            na = float(np.linalg.norm(a))
            if na <= TOLS.sub:
                raise FlatnessError("identity direction lies inside the subspace")
            lam = float(a @ self._vals) / na ** 2
            resid = float(np.linalg.norm(lam * a - self._vals))
            return lam, resid
        b = self._base
        p = i - (self._dirs.T @ (self._dirs @ i) if self._dirs.shape[0] else 0.0)
        npd = float(np.linalg.norm(p))
        if npd <= TOLS.sub:
            raise FlatnessError("identity direction lies inside the subspace")
        lam = float(p @ b) / npd ** 2
        resid = float(np.linalg.norm(lam * p - b))
        return lam, resid

    def intersect_linear(self, rows: np.ndarray, vals: np.ndarray) -> "AffineSubspace":
        """Intersection with the affine conditions ``rows @ x = vals``.

        Solved on the span parameterization; raises
        :class:`InconsistencyError` when the intersection is empty.
        """
        b = self.base_vec()
        d = self.dirs_coords()
        rows = np.asarray(rows, dtype=float).reshape(-1, self._m)
        vals = np.asarray(vals, dtype=float).reshape(-1)
        if rows.shape[0] == 0:
            return self
        mt = rows @ d.T                      # conditions in the t-parameters
        rhs = vals - rows @ b
        t0, *_ = np.linalg.lstsq(mt, rhs, rcond=None)
        resid = float(np.linalg.norm(mt @ t0 - rhs))
        if resid > TOLS.sub * max(float(np.linalg.norm(vals)), 1.0) * 1e3:
            raise InconsistencyError(
                f"affine intersection is empty (residual {resid:.3e})")
        null_t = scipy.linalg.null_space(mt).T if mt.shape[0] else np.eye(d.shape[0])
        new_dirs = null_t @ d
        new_base = b + d.T @ t0
        if new_dirs.shape[0]:
            new_base = new_base - new_dirs.T @ (new_dirs @ new_base)
        return AffineSubspace(self.matrix_dim, base=new_base, dirs=new_dirs)

    def transform_coords(self, fn) -> "AffineSubspace":
        """Image under an orthogonal coordinate map given as a batched callable."""
        if self._dirs is not None:
            dirs = fn(self._dirs) if self._dirs.shape[0] else self._dirs
            return AffineSubspace(self.matrix_dim, base=fn(self._base[None, :])[0],
                                  dirs=dirs)
        cons = fn(self._cons) if self._cons.shape[0] else self._cons
        return AffineSubspace(self.matrix_dim, cons=cons, vals=self._vals.copy())

    def __repr__(self) -> str:
        form = "span" if self._dirs is not None else "cons"
        return (f"AffineSubspace(dim={self.matrix_dim}, rank={self.rank()}, "
                f"form={form})")


def affine_dual(w: AffineSubspace) -> AffineSubspace:
    """Dual affine subspace; see :meth:`AffineSubspace.dual`."""
    return w.dual()


def subspace_contains(w, mat: np.ndarray, tol: float | None = None) -> bool:
    """Whether the Hermitian matrix lies on the (linear or affine) subspace."""
    mat = check_hermitian(mat, tol=max(TOLS.herm, tol or TOLS.sub))
    if mat.shape[0] != w.matrix_dim:
        raise ShapeMismatchError(
            f"matrix dim {mat.shape[0]} does not match subspace dim {w.matrix_dim}")
    return w.contains_vec(herm_to_coords(mat), tol)
