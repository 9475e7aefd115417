"""Matrix systems with inner products: validation, the transfer fixed-point
normalization, radical quotients, and decomposition into irreducible
subsystems.

A system assigns a vector space to every letter and a linear map to every
ordered letter pair (b, a) with ba != e; a form tuple assigns a Hermitian
matrix to every letter.  All numerics are double precision; the tolerance
ladder is: structural validation 1e-12, fixed-point residual 1e-9, subspace
invariance 1e-8.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import DegenerateSystemError, NormalizationError, ValidationError
from .words import Alphabet

VALIDATION_TOL = 1e-12
FIXED_POINT_TOL = 1e-9
INVARIANCE_TOL = 1e-8


class MatrixSystem:
    """Per-letter dimensions plus the transition maps between letter spaces.

    ``maps[b][a]`` is the matrix of the map from the space of ``a`` into the
    space of ``b`` (shape ``dims[b] x dims[a]``), or ``None`` for the zero
    map.  The map must be zero whenever ``b`` is the inverse of ``a``.
    """

    __slots__ = ("alphabet", "dims", "maps")

    def __init__(self, alphabet: Alphabet, dims: Sequence[int],
                 maps: Dict[Tuple[int, int], np.ndarray]):
        n = len(alphabet)
        if len(dims) != n:
            raise ValidationError(f"expected {n} dimensions, got {len(dims)}")
        self.alphabet = alphabet
        self.dims = tuple(int(d) for d in dims)
        grid: List[List[Optional[np.ndarray]]] = [[None] * n for _ in range(n)]
        for (b, a), m in maps.items():
            m = np.asarray(m, dtype=np.complex128)
            grid[b][a] = m
        self.maps = grid

    def map(self, b: int, a: int) -> np.ndarray:
        """Matrix of the (b, a) map, materializing zeros."""
        m = self.maps[b][a]
        if m is None:
            return np.zeros((self.dims[b], self.dims[a]), dtype=np.complex128)
        return m

    def nonzero_pairs(self):
        for b in range(len(self.alphabet)):
            for a in range(len(self.alphabet)):
                if self.maps[b][a] is not None:
                    yield b, a, self.maps[b][a]

    def scaled(self, factor: float) -> "MatrixSystem":
        return MatrixSystem(self.alphabet, self.dims,
                            {(b, a): factor * m for b, a, m in self.nonzero_pairs()})

    def total_dim(self) -> int:
        return sum(self.dims)

    def __repr__(self) -> str:
        return f"MatrixSystem(dims={self.dims})"


class FormTuple:
    """One Hermitian matrix per letter."""

    __slots__ = ("forms",)

    def __init__(self, forms: Sequence[np.ndarray]):
        self.forms = [np.asarray(f, dtype=np.complex128) for f in forms]

    def __getitem__(self, a: int) -> np.ndarray:
        return self.forms[a]

    def __len__(self) -> int:
        return len(self.forms)

    @classmethod
    def identity(cls, dims: Sequence[int]) -> "FormTuple":
        return cls([np.eye(d, dtype=np.complex128) for d in dims])

    def copy(self) -> "FormTuple":
        return FormTuple([f.copy() for f in self.forms])

    def total_trace(self) -> float:
        return float(sum(np.trace(f).real for f in self.forms))

    def max_abs(self) -> float:
        return max((np.abs(f).max() if f.size else 0.0) for f in self.forms)

    def min_eigenvalue(self) -> float:
        vals = [np.linalg.eigvalsh(f).min() for f in self.forms if f.size]
        return float(min(vals)) if vals else 0.0

    def is_psd(self, tol: float = 1e-10) -> bool:
        return self.min_eigenvalue() >= -tol


class Subsystem:
    """Graded family of subspaces, one per letter, stored as matrices whose
    columns are an orthonormal basis (possibly zero columns)."""

    __slots__ = ("bases",)

    def __init__(self, bases: Sequence[np.ndarray]):
        self.bases = [np.asarray(q, dtype=np.complex128) for q in bases]

    def dims(self) -> Tuple[int, ...]:
        return tuple(q.shape[1] for q in self.bases)

    def total_dim(self) -> int:
        return sum(self.dims())


def validate(system: MatrixSystem) -> List[str]:
    """Structural diagnostics; an empty list means the system is well formed."""
    problems: List[str] = []
    alphabet = system.alphabet
    n = len(alphabet)
    names = alphabet.names
    for a in range(n):
        if system.dims[a] < 1:
            problems.append(f"letter {names[a]} has dimension {system.dims[a]}, must be positive")
    for b in range(n):
        for a in range(n):
            m = system.maps[b][a]
            if m is None:
                continue
            want = (system.dims[b], system.dims[a])
            if m.shape != want:
                problems.append(f"map ({names[b]},{names[a]}) has shape {m.shape}, expected {want}")
            if alphabet.inv[a] == b and np.abs(m).max() > VALIDATION_TOL:
                problems.append(f"map ({names[b]},{names[a]}) must vanish: the pair composes to the identity")
    return problems


def transfer_apply(system: MatrixSystem, forms: FormTuple) -> FormTuple:
    """One application of the transfer map: a -> sum_b H_ba^* B_b H_ba."""
    n = len(system.alphabet)
    out = [np.zeros((d, d), dtype=np.complex128) for d in system.dims]
    for b, a, m in system.nonzero_pairs():
        fb = forms[b]
        if fb.shape != (system.dims[b], system.dims[b]):
            raise ValidationError(f"form at letter {system.alphabet.names[b]} has shape {fb.shape}")
        out[a] += m.conj().T @ fb @ m
    return FormTuple(out)


def compatibility_residual(system: MatrixSystem, forms: FormTuple) -> float:
    """Max-norm of transfer_apply(S, B) - B; zero exactly when compatible."""
    image = transfer_apply(system, forms)
    res = 0.0
    for a in range(len(system.alphabet)):
        diff = image[a] - forms[a]
        if diff.size:
            res = max(res, float(np.abs(diff).max()))
    return res


def _hermitize(forms: FormTuple) -> FormTuple:
    return FormTuple([(f + f.conj().T) / 2 for f in forms.forms])


def _trace_normalize(forms: FormTuple) -> FormTuple:
    t = forms.total_trace()
    if t <= 0:
        raise DegenerateSystemError("form tuple lost all mass during iteration")
    return FormTuple([f / t for f in forms.forms])


def _tuple_dot(x: FormTuple, y: FormTuple) -> float:
    return float(sum(np.tensordot(a.conj(), b, axes=2).real for a, b in zip(x.forms, y.forms)))


def _max_diff(x: FormTuple, y: FormTuple) -> float:
    return max(float(np.abs(a - b).max()) if a.size else 0.0 for a, b in zip(x.forms, y.forms))


@dataclass
class NormalizationResult:
    """Scaled system together with its compatible fixed-point tuple."""

    system: MatrixSystem
    forms: FormTuple
    spectral_radius: float
    residual: float
    iterations: int
    degenerate: bool = False

    def __iter__(self):
        return iter((self.system, self.forms, self.spectral_radius))


def _power_iterate(system: MatrixSystem, start: FormTuple, tol: float,
                   max_iter: int) -> Tuple[FormTuple, float, float, int]:
    b = _trace_normalize(_hermitize(start))
    best = None
    best_res = np.inf
    best_rho = 0.0
    stall = 0
    for it in range(1, max_iter + 1):
        tb = _hermitize(transfer_apply(system, b))
        rho = _tuple_dot(tb, b) / _tuple_dot(b, b)
        if rho <= 0 or tb.total_trace() <= 0:
            raise DegenerateSystemError("transfer map annihilated the iterate: all paths die out")
        res = _max_diff(FormTuple([f / rho for f in tb.forms]), b)
        if res < best_res:
            if res > 0.5 * best_res:
                stall += 1
            else:
                stall = 0
            best, best_res, best_rho = b, res, rho
        else:
            stall += 1
        if res <= tol:
            return b, rho, res, it
        if stall > 200:
            # converged to the attainable floating-point plateau
            return best, best_rho, best_res, it
        if it > max_iter // 2:
            # damp possible period-two oscillation of an imprimitive system
            mixed = FormTuple([(x + y / rho) / 2 for x, y in zip(b.forms, tb.forms)])
            b = _trace_normalize(_hermitize(mixed))
        else:
            b = _trace_normalize(tb)
    return best if best is not None else b, best_rho, best_res, max_iter


def _transfer_matrix(system: MatrixSystem) -> Tuple[np.ndarray, List[Tuple[int, int]]]:
    """Dense matrix of the transfer map on the (complex) tuple space."""
    n = len(system.alphabet)
    shapes = [(d, d) for d in system.dims]
    offsets = []
    run = 0
    for d in system.dims:
        offsets.append(run)
        run += d * d
    total = run

    def vec(forms: FormTuple) -> np.ndarray:
        return np.concatenate([forms[a].ravel() for a in range(n)])

    cols = []
    for a in range(n):
        d = system.dims[a]
        for i in range(d):
            for j in range(d):
                basis = [np.zeros(s, dtype=np.complex128) for s in shapes]
                basis[a][i, j] = 1.0
                cols.append(vec(transfer_apply(system, FormTuple(basis))))
    return np.column_stack(cols) if total else np.zeros((0, 0)), offsets


def _dense_fixed_point(system: MatrixSystem) -> Tuple[FormTuple, float, float, bool]:
    """Exact leading eigenpair of the transfer map: spectral projection of
    the identity tuple onto the leading eigenspace.  Covers imprimitive
    systems whose peripheral spectrum makes plain power iteration cycle."""
    n = len(system.alphabet)
    matrix, offsets = _transfer_matrix(system)
    lam, vecs = np.linalg.eig(matrix)
    radius = float(np.abs(lam).max())
    if radius <= 0:
        raise DegenerateSystemError("transfer map is nilpotent: all paths die out")
    peripheral = np.abs(lam) >= radius * (1 - 1e-9)
    real_leads = lam[peripheral & (np.abs(lam.imag) <= 1e-9 * radius) & (lam.real > 0)]
    if real_leads.size == 0:
        raise NormalizationError("no positive leading transfer eigenvalue found")
    rho = float(real_leads.real.max())
    sel = np.abs(lam - rho) <= 1e-8 * radius
    identity_vec = np.concatenate([np.eye(d, dtype=np.complex128).ravel()
                                   for d in system.dims])
    coords = np.linalg.solve(vecs, identity_vec)
    proj = vecs[:, sel] @ coords[sel]
    forms = []
    for a, d in enumerate(system.dims):
        block = proj[offsets[a]: offsets[a] + d * d].reshape(d, d)
        forms.append((block + block.conj().T) / 2)
    b = FormTuple(forms)
    # clip roundoff negatives so the tuple is honestly positive semidefinite
    floored = []
    for f in b.forms:
        w, v = np.linalg.eigh(f)
        floored.append((v * np.clip(w, 0.0, None)) @ v.conj().T)
    b = _trace_normalize(FormTuple(floored))
    res = _max_diff(FormTuple([f / rho for f in transfer_apply(system, b).forms]), b)
    degenerate = int(np.sum(sel)) > 1 or int(np.sum(peripheral)) > int(np.sum(sel))
    return b, rho, res, degenerate


def normalize(system: MatrixSystem, tol: float = 1e-13, max_iter: int = 100_000,
              degeneracy_probe: bool = True, seed: int = 0) -> NormalizationResult:
    """Scale the system so the transfer map has spectral radius one and return
    a positive semidefinite fixed-point tuple (total trace one).

    Power iteration on the tuple space from the identity seed, with a
    Rayleigh-quotient estimate of the radius; when the iteration plateaus
    (imprimitive systems carry peripheral eigenvalues that make it cycle) the
    leading eigenpair is taken from a dense spectral solve instead.  Raises
    :class:`DegenerateSystemError` when every transfer path dies out, and
    :class:`NormalizationError` when no usable fixed point emerges.  A second
    iteration from a random seed probes for a (near-)degenerate leading
    eigenvalue; degeneracy is flagged, not resolved.
    """
    if not any(True for _ in system.nonzero_pairs()):
        raise DegenerateSystemError("all maps are zero")
    if any(d < 1 for d in system.dims):
        raise ValidationError("dimensions must be positive to normalize")

    b, rho, res, iters = _power_iterate(system, FormTuple.identity(system.dims), tol, max_iter)
    degenerate = False
    used_dense = False
    if res > max(tol, 1e-10):
        b, rho, res, degenerate = _dense_fixed_point(system)
        used_dense = True
        if res > max(tol, 1e-10):
            raise NormalizationError(
                f"no fixed point within {max_iter} iterations (residual {res:.3e})",
                residual=res)
    if rho <= max(tol, 1e-12):
        raise DegenerateSystemError(f"spectral radius {rho:.3e} is numerically zero")

    if degeneracy_probe and not used_dense:
        rng = np.random.default_rng(seed)
        probe = FormTuple([np.eye(d) + 0.5 * _random_psd(rng, d) for d in system.dims])
        try:
            b2, rho2, res2, _ = _power_iterate(system, probe, 1e-9, max(1000, max_iter // 10))
            if res2 <= 1e-8 and (abs(rho2 - rho) > 1e-6 * max(1.0, rho)
                                 or _max_diff(b, b2) > 1e-6):
                degenerate = True
        except (DegenerateSystemError, NormalizationError):
            degenerate = True

    scaled = system.scaled(1.0 / np.sqrt(rho))
    final_res = compatibility_residual(scaled, b)
    return NormalizationResult(scaled, b, float(rho), float(final_res), iters, degenerate)


def _random_psd(rng: np.random.Generator, d: int) -> np.ndarray:
    m = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return m @ m.conj().T / d


def radical_quotient(system: MatrixSystem, forms: FormTuple,
                     tol: float = INVARIANCE_TOL) -> Tuple[MatrixSystem, FormTuple]:
    """Quotient every letter space by the kernel of its form.

    Compatibility forces the kernel tuple to be an invariant subsystem, so
    the quotient maps are well defined; the induced forms are positive
    definite (or the quotient is zero-dimensional, which callers must check).
    """
    res = compatibility_residual(system, forms)
    scale = max(forms.max_abs(), 1e-30)
    if res > max(tol, tol * scale):
        raise ValidationError(f"forms are not compatible (residual {res:.3e})")
    n = len(system.alphabet)
    cobases: List[np.ndarray] = []
    cut = 1e-9 * max(scale, 1.0)
    for a in range(n):
        w, v = np.linalg.eigh((forms[a] + forms[a].conj().T) / 2)
        keep = w > cut
        cobases.append(v[:, keep])
    new_dims = [q.shape[1] for q in cobases]
    new_maps = {}
    for b, a, m in system.nonzero_pairs():
        if new_dims[b] and new_dims[a]:
            new_maps[(b, a)] = cobases[b].conj().T @ m @ cobases[a]
    new_forms = FormTuple([q.conj().T @ forms[a] @ q for a, q in enumerate(cobases)])
    return MatrixSystem(system.alphabet, new_dims, new_maps), new_forms


def subsystem_residual(system: MatrixSystem, sub: Subsystem) -> float:
    """Max over letter pairs of ||(I - P_b) H_ba P_a|| with P the orthogonal
    projection onto the stored basis."""
    worst = 0.0
    for b, a, m in system.nonzero_pairs():
        qa, qb = sub.bases[a], sub.bases[b]
        if qa.shape[1] == 0:
            continue
        image = m @ qa
        if qb.shape[1]:
            image = image - qb @ (qb.conj().T @ image)
        if image.size:
            worst = max(worst, float(np.linalg.norm(image, 2)))
    return worst


def _spin_up(system: MatrixSystem, seeds: List[List[np.ndarray]],
             rank_tol: float = 1e-9) -> Subsystem:
    """Close a graded family of vectors under all maps."""
    n = len(system.alphabet)
    spans: List[List[np.ndarray]] = [[v for v in seeds[a]] for a in range(n)]

    def orthobasis(vectors: List[np.ndarray], d: int) -> np.ndarray:
        if not vectors:
            return np.zeros((d, 0), dtype=np.complex128)
        m = np.column_stack(vectors)
        u, s, _ = np.linalg.svd(m, full_matrices=False)
        keep = s > rank_tol * max(1.0, s[0] if len(s) else 1.0)
        return u[:, keep]

    bases = [orthobasis(spans[a], system.dims[a]) for a in range(n)]
    changed = True
    while changed:
        changed = False
        for b, a, m in system.nonzero_pairs():
            if bases[a].shape[1] == 0:
                continue
            image = m @ bases[a]
            qb = bases[b]
            leftover = image - qb @ (qb.conj().T @ image) if qb.shape[1] else image
            norms = np.linalg.norm(leftover, axis=0)
            fresh = leftover[:, norms > rank_tol]
            if fresh.shape[1]:
                bases[b] = orthobasis([qb, fresh] if qb.shape[1] else [fresh], system.dims[b])
                changed = True
    return Subsystem(bases)


def _random_loop_element(system: MatrixSystem, a: int, rng: np.random.Generator,
                         max_len: int = 6) -> Optional[np.ndarray]:
    """Product of maps along a random cycle a -> ... -> a."""
    n = len(system.alphabet)
    inv = system.alphabet.inv
    length = int(rng.integers(2, max_len + 1))
    path = [a]
    for _ in range(length - 1):
        choices = [c for c in range(n) if c != inv[path[-1]]]
        path.append(int(rng.choice(choices)))
    if a == inv[path[-1]]:
        return None
    path.append(a)
    m = np.eye(system.dims[a], dtype=np.complex128)
    for src, dst in zip(path[:-1], path[1:]):
        step = system.maps[dst][src]
        if step is None:
            return None
        m = step @ m
    return m


def find_invariant_subsystem(system: MatrixSystem, rounds: int = 50, seed: int = 0,
                             tol: float = INVARIANCE_TOL) -> Optional[Subsystem]:
    """Randomized search for a nontrivial proper invariant subsystem.

    Alternates spin-ups of random vectors with spin-ups of eigenvectors of
    random loop-path products (the nullspace trick of computational module
    theory, adapted to the letter-graded setting).  A returned subsystem is
    an exact witness, re-verified against ``tol``; ``None`` only means no
    subsystem was found within the round budget.
    """
    n = len(system.alphabet)
    total = system.total_dim()
    if total == 0:
        return None
    rng = np.random.default_rng(seed)

    def consider(sub: Subsystem) -> Optional[Subsystem]:
        t = sub.total_dim()
        if 0 < t < total and subsystem_residual(system, sub) <= tol:
            return sub
        return None

    for round_no in range(rounds):
        a = round_no % n
        if system.dims[a] == 0:
            continue
        seeds: List[List[np.ndarray]] = [[] for _ in range(n)]
        if round_no % 2 == 0:
            v = rng.normal(size=system.dims[a]) + 1j * rng.normal(size=system.dims[a])
            seeds[a].append(v / np.linalg.norm(v))
            found = consider(_spin_up(system, seeds))
            if found is not None:
                return found
        else:
            loop = _random_loop_element(system, a, rng)
            if loop is None or not np.isfinite(loop).all():
                continue
            scale = np.abs(loop).max()
            if scale < 1e-14:
                continue
            eigvals, eigvecs = np.linalg.eig(loop / scale)
            for k in range(eigvecs.shape[1]):
                v = eigvecs[:, k]
                nv = np.linalg.norm(v)
                if nv < 1e-12:
                    continue
                trial: List[List[np.ndarray]] = [[] for _ in range(n)]
                trial[a].append(v / nv)
                found = consider(_spin_up(system, trial))
                if found is not None:
                    return found
    return None


@dataclass
class Component:
    """One summand of an orthogonal decomposition.

    ``bases[a]`` has orthonormal columns with respect to the parent form
    tuple; restricted forms are therefore identity matrices.
    """

    system: MatrixSystem
    forms: FormTuple
    bases: List[np.ndarray]

    def dims(self) -> Tuple[int, ...]:
        return self.system.dims


def _commutant_basis(system: MatrixSystem, forms: FormTuple,
                     null_tol: float = 1e-9) -> List[List[np.ndarray]]:
    """Real basis of the space of form-selfadjoint tuples commuting with all
    maps: E_b H_ba = H_ba E_a and B_a E_a = E_a^* B_a."""
    n = len(system.alphabet)
    dims = system.dims
    sizes = [d * d for d in dims]
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    nc = int(offsets[-1])

    def unpack(vec_re: np.ndarray, vec_im: np.ndarray) -> List[np.ndarray]:
        out = []
        for a in range(n):
            s, e = offsets[a], offsets[a + 1]
            out.append((vec_re[s:e] + 1j * vec_im[s:e]).reshape(dims[a], dims[a]))
        return out

    def apply_constraints(es: List[np.ndarray]) -> np.ndarray:
        rows = []
        for b, a, m in system.nonzero_pairs():
            r = es[b] @ m - m @ es[a]
            rows.append(r.ravel())
        for a in range(n):
            r = forms[a] @ es[a] - es[a].conj().T @ forms[a]
            rows.append(r.ravel())
        flat = np.concatenate(rows) if rows else np.zeros(0, dtype=np.complex128)
        return np.concatenate([flat.real, flat.imag])

    cols = []
    zero = np.zeros(nc)
    for j in range(nc):
        e = zero.copy()
        e[j] = 1.0
        cols.append(apply_constraints(unpack(e, zero)))
    for j in range(nc):
        e = zero.copy()
        e[j] = 1.0
        cols.append(apply_constraints(unpack(zero, e)))
    mat = np.column_stack(cols) if cols else np.zeros((0, 0))
    u, s, vt = np.linalg.svd(mat)
    rank = int(np.sum(s > null_tol * max(1.0, s[0] if len(s) else 1.0)))
    null = vt[rank:].T
    basis = []
    for k in range(null.shape[1]):
        v = null[:, k]
        basis.append(unpack(v[:nc], v[nc:]))
    return basis


def decompose(system: MatrixSystem, forms: FormTuple, seed: int = 0,
              tol: float = INVARIANCE_TOL) -> List[Component]:
    """Split a system with a strictly positive definite compatible form tuple
    into pairwise form-orthogonal irreducible components.

    The splitting engine diagonalizes a random form-selfadjoint element of
    the commutant; its eigenspaces are invariant, mutually orthogonal in the
    form metric, and carry the restricted system.  Recursion stops when the
    commutant is one-dimensional, which certifies irreducibility.
    """
    res = compatibility_residual(system, forms)
    scale = max(forms.max_abs(), 1e-30)
    if res > max(1e-8, 1e-8 * scale):
        raise ValidationError(f"forms are not compatible (residual {res:.3e})")
    mins = forms.min_eigenvalue()
    if mins <= 1e-10 * scale:
        raise ValidationError(
            "forms are not strictly positive definite; apply radical_quotient first")

    rng = np.random.default_rng(seed)
    identity_bases = [np.eye(d, dtype=np.complex128) for d in system.dims]
    return _decompose_rec(system, forms, identity_bases, rng, tol)


def _decompose_rec(system: MatrixSystem, forms: FormTuple,
                   carried: List[np.ndarray], rng: np.random.Generator,
                   tol: float) -> List[Component]:
    n = len(system.alphabet)
    commutant = _commutant_basis(system, forms)
    if len(commutant) <= 1:
        chols = [np.linalg.cholesky(_pd_fix(forms[a])) if system.dims[a] else
                 np.zeros((0, 0)) for a in range(n)]
        bases = []
        new_maps = {}
        for a in range(n):
            # orthonormalize the carried embedding in the parent form metric
            bases.append(carried[a] @ np.linalg.inv(chols[a].conj().T) if system.dims[a]
                         else carried[a])
        for b, a, m in system.nonzero_pairs():
            new_maps[(b, a)] = chols[b].conj().T @ m @ np.linalg.inv(chols[a].conj().T)
        sys_c = MatrixSystem(system.alphabet, system.dims, new_maps)
        return [Component(sys_c, FormTuple.identity(system.dims), bases)]

    for cluster_tol in (1e-6, 1e-8, 1e-10):
        for _ in range(5):
            coeffs = rng.normal(size=len(commutant))
            element = [sum(c * eb[a] for c, eb in zip(coeffs, commutant)) for a in range(n)]
            norm = max(max(np.abs(e).max() for e in element if e.size), 1e-30)
            element = [e / norm for e in element]
            split = _split_by_element(system, forms, element, cluster_tol, tol)
            if split is not None:
                out: List[Component] = []
                for sub_system, sub_forms, sub_bases in split:
                    comp_carried = [carried[a] @ sub_bases[a] for a in range(n)]
                    out.extend(_decompose_rec(sub_system, sub_forms, comp_carried, rng, tol))
                return out
    raise NormalizationError("decomposition nonconvergence (tolerance cascade exhausted)")


def _pd_fix(f: np.ndarray) -> np.ndarray:
    return (f + f.conj().T) / 2 + 1e-14 * max(1.0, np.abs(f).max()) * np.eye(f.shape[0])


def _split_by_element(system: MatrixSystem, forms: FormTuple,
                      element: List[np.ndarray], cluster_tol: float,
                      tol: float):
    """Eigen-split along one selfadjoint commutant element; None if the
    element fails to separate or the split does not verify."""
    n = len(system.alphabet)
    all_vals = []
    per_letter = []
    for a in range(n):
        d = system.dims[a]
        if d == 0:
            per_letter.append((np.zeros(0), np.zeros((0, 0))))
            continue
        chol = np.linalg.cholesky(_pd_fix(forms[a]))
        m = chol.conj().T @ element[a] @ np.linalg.inv(chol.conj().T)
        m = (m + m.conj().T) / 2
        w, u = np.linalg.eigh(m)
        vecs = np.linalg.inv(chol.conj().T) @ u  # form-orthonormal columns
        per_letter.append((w, vecs))
        all_vals.extend(w.tolist())
    if not all_vals:
        return None
    all_vals.sort()
    clusters = [[all_vals[0]]]
    for v in all_vals[1:]:
        if v - clusters[-1][-1] <= cluster_tol:
            clusters[-1].append(v)
        else:
            clusters.append([v])
    if len(clusters) < 2:
        return None
    bounds = [(c[0] - cluster_tol / 2, c[-1] + cluster_tol / 2) for c in clusters]

    pieces = []
    for lo, hi in bounds:
        bases = []
        for a in range(n):
            w, vecs = per_letter[a]
            sel = (w >= lo) & (w <= hi)
            bases.append(vecs[:, sel] if vecs.size else np.zeros((system.dims[a], 0)))
        sub_dims = [q.shape[1] for q in bases]
        sub_maps = {}
        ok = True
        for b, a, m in system.nonzero_pairs():
            qa, qb = bases[a], bases[b]
            if qa.shape[1] == 0:
                continue
            image = m @ qa
            coords = qb.conj().T @ forms[b] @ image if qb.shape[1] else np.zeros((0, qa.shape[1]))
            recon = qb @ coords if qb.shape[1] else np.zeros_like(image)
            if image.size and np.linalg.norm(image - recon, 2) > tol * max(1.0, np.linalg.norm(m, 2)):
                ok = False
                break
            if qb.shape[1]:
                sub_maps[(b, a)] = coords
        if not ok:
            return None
        sub_system = MatrixSystem(system.alphabet, sub_dims, sub_maps)
        pieces.append((sub_system, FormTuple.identity(sub_dims), bases))
    return pieces


def spherical_system(alphabet: Alphabet, scale: Optional[float] = None) -> Tuple[MatrixSystem, FormTuple]:
    """One-dimensional system with equal maps between all non-inverse letter
    pairs.  The default scale 1/sqrt(|A|-1) makes the identity forms
    compatible; ``scale=1.0`` gives the unscaled variant."""
    n = len(alphabet)
    if scale is None:
        scale = 1.0 / np.sqrt(n - 1)
    maps = {}
    one = np.array([[scale]], dtype=np.complex128)
    for b in range(n):
        for a in range(n):
            if alphabet.inv[a] != b:
                maps[(b, a)] = one.copy()
    return MatrixSystem(alphabet, [1] * n, maps), FormTuple([np.eye(1)] * n)
