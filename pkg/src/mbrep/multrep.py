"""Multiplicative vectors and their unitary action, inner products and matrix
coefficients, boundary cylinder operators, and crossed-product elements.

A vector is a finite germ: values on one word sphere, propagated outward by
the system maps.  Matrix coefficients come in two backends: a literal
sphere-sum oracle (exponential, see ``_kernels``) and an accelerated cone
decomposition along the geodesic of the acting word whose tail sums collapse
through the compatibility identity.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from . import _kernels
from .errors import CapExceededError, DepthError, ValidationError
from .system import FormTuple, MatrixSystem, compatibility_residual
from .words import (DEFAULT_CAP, Alphabet, Cylinder, CylinderUnion, Word,
                    cylinder_image, multiply, refine, sphere, sphere_size)


class RepSpace:
    """A matrix system with a compatible form tuple, ready for evaluation.

    Compatibility is what makes sphere sums depth-independent, so grossly
    incompatible forms are rejected here rather than allowed to corrupt every
    downstream quantity.
    """

    def __init__(self, system: MatrixSystem, forms: FormTuple, check: bool = True):
        self.system = system
        self.forms = forms
        self.residual = compatibility_residual(system, forms)
        if check:
            scale = max(forms.max_abs(), 1e-30)
            if self.residual > 1e-6 * max(1.0, scale):
                raise ValidationError(
                    f"forms are not compatible with the maps (residual {self.residual:.3e})")
        self._padded: Optional[Tuple[np.ndarray, np.ndarray, int]] = None

    def padded(self) -> Tuple[np.ndarray, np.ndarray, int]:
        if self._padded is None:
            self._padded = _kernels.pack_system(self.system, self.forms)
        return self._padded

    @property
    def alphabet(self) -> Alphabet:
        return self.system.alphabet

    def dim(self, letter: int) -> int:
        return self.system.dims[letter]

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if not isinstance(other, RepSpace):
            return NotImplemented
        if self.system.alphabet != other.system.alphabet:
            return False
        if self.system.dims != other.system.dims:
            return False
        for b in range(len(self.alphabet)):
            for a in range(len(self.alphabet)):
                if not np.array_equal(self.system.map(b, a), other.system.map(b, a)):
                    return False
        return all(np.array_equal(x, y) for x, y in zip(self.forms.forms, other.forms.forms))

    def __hash__(self):
        return hash((self.system.alphabet, self.system.dims))


class MultVector:
    """Finite presentation of a multiplicative function: a depth M >= 1 and a
    table of values on the radius-M sphere (absent words mean zero).

    Values at longer words follow by map propagation; two presentations of
    different depths describe the same function when one deepens to the
    other.
    """

    __slots__ = ("space", "depth", "values")

    def __init__(self, space: RepSpace, depth: int, values: Dict[Word, np.ndarray]):
        if depth < 1:
            raise ValidationError(f"depth must be >= 1, got {depth}")
        self.space = space
        self.depth = depth
        table: Dict[Word, np.ndarray] = {}
        for w, v in values.items():
            if len(w) != depth:
                raise ValidationError(f"value word {w} has length {len(w)}, expected {depth}")
            v = np.asarray(v, dtype=np.complex128)
            want = space.dim(w.last())
            if v.shape != (want,):
                raise ValidationError(f"value at {w} has shape {v.shape}, expected ({want},)")
            if np.any(v != 0):
                table[w] = v
        self.values = table

    @classmethod
    def seed(cls, space: RepSpace, values: Dict[Word, Sequence[complex]]) -> "MultVector":
        depths = {len(w) for w in values}
        if len(depths) != 1:
            raise ValidationError("seed words must all have the same length")
        return cls(space, depths.pop(), {w: np.asarray(v) for w, v in values.items()})

    def is_zero(self) -> bool:
        return not self.values

    def __repr__(self) -> str:
        return f"MultVector(depth={self.depth}, support={len(self.values)})"


def _propagated(space: RepSpace, v: np.ndarray, prev: int, letter: int) -> np.ndarray:
    m = space.system.maps[letter][prev]
    if m is None:
        return np.zeros(space.dim(letter), dtype=np.complex128)
    return m @ v


def evaluate(f: MultVector, w: Word) -> np.ndarray:
    """Value of the propagated function at a word of length >= the depth."""
    if len(w) < f.depth:
        raise DepthError(f"cannot evaluate at {w}: below presentation depth {f.depth}")
    prefix = Word(w.alphabet, w.letters[: f.depth])
    v = f.values.get(prefix)
    if v is None:
        return np.zeros(f.space.dim(w.last()), dtype=np.complex128)
    for k in range(f.depth, len(w)):
        v = _propagated(f.space, v, w.letters[k - 1], w.letters[k])
    return v


def deepen(f: MultVector, new_depth: int, cap: int = DEFAULT_CAP) -> MultVector:
    """Re-present the same function on a deeper sphere by propagation."""
    if new_depth < f.depth:
        raise ValidationError(f"cannot deepen from {f.depth} to shallower {new_depth}")
    if new_depth == f.depth:
        return f
    n = len(f.space.alphabet)
    growth = (n - 1) ** (new_depth - f.depth)
    if len(f.values) * growth > cap:
        raise CapExceededError(
            f"deepening to {new_depth} would track {len(f.values) * growth} words, cap {cap}")
    inv = f.space.alphabet.inv
    frontier = list(f.values.items())
    for _ in range(new_depth - f.depth):
        nxt = []
        for w, v in frontier:
            last = w.last()
            for c in range(n):
                if c == inv[last]:
                    continue
                child = _propagated(f.space, v, last, c)
                if np.any(child != 0):
                    cw = Word.__new__(Word)
                    cw.alphabet = w.alphabet
                    cw.letters = w.letters + (c,)
                    nxt.append((cw, child))
        frontier = nxt
    out = MultVector.__new__(MultVector)
    out.space = f.space
    out.depth = new_depth
    out.values = dict(frontier)
    return out


def _common_depth(f: MultVector, g: MultVector, cap: int = DEFAULT_CAP) -> Tuple[MultVector, MultVector]:
    d = max(f.depth, g.depth)
    return deepen(f, d, cap=cap), deepen(g, d, cap=cap)


def inner(f: MultVector, g: MultVector, cap: int = DEFAULT_CAP) -> complex:
    """Inner product: the sphere sum of form pairings at the common depth.

    Compatibility telescopes the sum, so any admissible depth gives the same
    value; this is the accelerated backend, checked in tests against the
    literal sum at deeper truncations.
    """
    if f.space != g.space:
        raise ValidationError("vectors live on different systems")
    fd, gd = _common_depth(f, g, cap=cap)
    forms = f.space.forms
    total = 0.0 + 0.0j
    for w, fv in fd.values.items():
        gv = gd.values.get(w)
        if gv is not None:
            total += np.vdot(gv, forms[w.last()] @ fv)
    return complex(total)


def norm(f: MultVector) -> float:
    return float(np.sqrt(max(inner(f, f).real, 0.0)))


def vadd(f: MultVector, g: MultVector, cap: int = DEFAULT_CAP) -> MultVector:
    if f.space != g.space:
        raise ValidationError("vectors live on different systems")
    fd, gd = _common_depth(f, g, cap=cap)
    vals = dict(fd.values)
    for w, v in gd.values.items():
        if w in vals:
            vals[w] = vals[w] + v
        else:
            vals[w] = v
    return MultVector(f.space, fd.depth, vals)


def vscale(c: complex, f: MultVector) -> MultVector:
    return MultVector(f.space, f.depth, {w: c * v for w, v in f.values.items()})


def vsub(f: MultVector, g: MultVector) -> MultVector:
    return vadd(f, vscale(-1.0, g))


def zero_vector(space: RepSpace, depth: int = 1) -> MultVector:
    return MultVector(space, depth, {})


def distance(f: MultVector, g: MultVector) -> float:
    return norm(vsub(f, g))


def act(x: Word, f: MultVector, cap: int = DEFAULT_CAP) -> MultVector:
    """The unitary action: (act(x, f))(y) = f(x^-1 y), presented at depth
    f.depth + |x|."""
    if x.is_identity():
        return f
    space = f.space
    new_depth = f.depth + len(x)
    xinv = x.inverse()
    values: Dict[Word, np.ndarray] = {}
    budget = 0
    n = len(space.alphabet)
    for z, _ in f.values.items():
        for part in cylinder_image(x, Cylinder(z)):
            budget += (n - 1) ** (new_depth - len(part.stem))
            if budget > cap:
                raise CapExceededError(f"action support would exceed cap {cap}")
            for fine in refine(part, new_depth, cap=cap):
                y = fine.stem
                w = multiply(xinv, y)
                v = evaluate(f, w)
                if np.any(v != 0):
                    values[y] = v
    out = MultVector.__new__(MultVector)
    out.space = space
    out.depth = new_depth
    out.values = values
    return out


def _brute_coefficient(x: Word, f: MultVector, g: MultVector, cap: int) -> complex:
    m_depth = max(f.depth, g.depth) + len(x) + 1
    if sphere_size(f.space.alphabet, m_depth) > cap:
        raise CapExceededError(
            f"brute sum over sphere {m_depth} exceeds cap {cap} for word {x}")
    return _kernels.brute_pairing(f.space, x, f, g, m_depth)


def _fast_coefficient(x: Word, f: MultVector, g: MultVector) -> complex:
    if x.is_identity():
        return inner(f, g)
    space = f.space
    alphabet = space.alphabet
    n = len(alphabet)
    inv = alphabet.inv
    forms = space.forms
    xl = x.letters
    lx = len(xl)
    xinv_letters = x.inverse().letters
    total = 0.0 + 0.0j
    for i in range(lx + 1):
        for c in range(n):
            if i < lx and c == xl[i]:
                continue
            if i > 0 and c == inv[xl[i - 1]]:
                continue
            if i == lx and c == inv[xl[lx - 1]]:
                continue
            froot = Word(alphabet, xinv_letters[: lx - i] + (c,))
            groot = Word(alphabet, xl[:i] + (c,))
            warm = max(0, f.depth - len(froot), g.depth - len(groot))
            stack = [(froot, groot)]
            for _ in range(warm):
                nxt = []
                for fw, gw in stack:
                    last = fw.last()
                    for d in range(n):
                        if d == inv[last]:
                            continue
                        dw = Word(alphabet, (d,))
                        nxt.append((multiply(fw, dw), multiply(gw, dw)))
                stack = nxt
            for fw, gw in stack:
                fv = evaluate(f, fw)
                gv = evaluate(g, gw)
                total += np.vdot(gv, forms[fw.last()] @ fv)
    return complex(total)


def _reference_coefficient(x: Word, f: MultVector, g: MultVector, cap: int) -> complex:
    """Plain literal sphere sum; the small-case gate for both hot backends."""
    m_depth = max(f.depth, g.depth) + len(x) + 1
    space = f.space
    forms = space.forms
    xinv = x.inverse()
    total = 0.0 + 0.0j
    for y in sphere(space.alphabet, m_depth, cap=cap):
        fv = evaluate(f, multiply(xinv, y))
        gv = evaluate(g, y)
        total += np.vdot(gv, forms[y.last()] @ fv)
    return complex(total)


def coefficient(x: Word, f: MultVector, g: MultVector, backend: str = "fast",
                cap: int = DEFAULT_CAP) -> complex:
    """Matrix coefficient <act(x, f), g>.

    ``fast`` decomposes the sphere by where words branch off the geodesic of
    ``x`` and collapses each branch through compatibility (cost linear in
    |x|); ``brute`` evaluates the literal truncated sphere sum and is the
    independent oracle; ``reference`` is a slow pure-python literal sum.
    """
    if f.space != g.space:
        raise ValidationError("vectors live on different systems")
    if backend == "fast":
        return _fast_coefficient(x, f, g)
    if backend == "brute":
        return _brute_coefficient(x, f, g, cap)
    if backend == "reference":
        return _reference_coefficient(x, f, g, cap)
    raise ValidationError(f"unknown backend {backend!r}")


def cylinder_op(z: Union[Word, Cylinder], f: MultVector, cap: int = DEFAULT_CAP) -> MultVector:
    """Boundary multiplication operator of the cylinder indicator at ``z``:
    keep the values inside the cone, zero the rest."""
    stem = z.stem if isinstance(z, Cylinder) else z
    if stem.is_identity():
        raise ValidationError("cylinder stem must be nonempty")
    d = max(f.depth, len(stem))
    fd = deepen(f, d, cap=cap)
    kept = {w: v for w, v in fd.values.items() if w.starts_with(stem)}
    out = MultVector.__new__(MultVector)
    out.space = f.space
    out.depth = d
    out.values = kept
    return out


def covariance_check(x: Word, z: Word, f: MultVector, cap: int = DEFAULT_CAP) -> float:
    """Norm of the defect of the boundary covariance identity on ``f``:
    conjugating the cylinder operator by the action of ``x`` must equal the
    operator of the translated cylinder set."""
    lhs = act(x, cylinder_op(z, act(x.inverse(), f, cap=cap), cap=cap), cap=cap)
    rhs = zero_vector(f.space, f.depth)
    for part in cylinder_image(x, Cylinder(z)):
        rhs = vadd(rhs, cylinder_op(part.stem, f, cap=cap), cap=cap)
    return distance(lhs, rhs)


@dataclass(frozen=True)
class CrossedElement:
    """Finite sum of (coefficient, cylinder-or-whole-boundary, group element)
    terms acting by boundary multiplication after translation."""

    terms: Tuple[Tuple[complex, Optional[Cylinder], Word], ...]

    @classmethod
    def of(cls, *terms) -> "CrossedElement":
        packed = []
        for coeff, cyl, gamma in terms:
            if cyl is not None and not isinstance(cyl, Cylinder):
                cyl = Cylinder(cyl)
            packed.append((complex(coeff), cyl, gamma))
        return cls(tuple(packed))


def apply_crossed(element: CrossedElement, f: MultVector, cap: int = DEFAULT_CAP) -> MultVector:
    out = zero_vector(f.space, f.depth)
    for coeff, cyl, gamma in element.terms:
        moved = act(gamma, f, cap=cap)
        if cyl is not None:
            moved = cylinder_op(cyl, moved, cap=cap)
        out = vadd(out, vscale(coeff, moved), cap=cap)
    return out


def precompose(coefficient_fn: Callable[[Word], complex],
               images: Dict[int, Word], alphabet: Alphabet) -> Callable[[Word], complex]:
    """Precompose a coefficient function with the endomorphism sending each
    letter to the given reduced word (inverse letters filled in
    automatically)."""
    table: Dict[int, Word] = {}
    for c, w in images.items():
        table[c] = w
        ci = alphabet.inv[c]
        wi = w.inverse()
        if ci in images and images[ci] != wi:
            raise ValidationError(
                f"images of {alphabet.names[c]} and {alphabet.names[ci]} are not inverse")
        table.setdefault(ci, wi)
    missing = [alphabet.names[c] for c in range(len(alphabet)) if c not in table]
    if missing:
        raise ValidationError(f"no image given for letters {missing}")

    def substituted(w: Word) -> Word:
        out = Word.identity(alphabet)
        for c in w.letters:
            out = multiply(out, table[c])
        return out

    def composed(w: Word) -> complex:
        return coefficient_fn(substituted(w))

    return composed


def coefficient_function(f: MultVector, g: Optional[MultVector] = None,
                         backend: str = "fast") -> Callable[[Word], complex]:
    """The map x -> <act(x, f), g> as a callable."""
    gg = f if g is None else g

    def fn(x: Word) -> complex:
        return coefficient(x, f, gg, backend=backend)

    return fn


def gram_matrix(words: Sequence[Word], f: MultVector, backend: str = "fast") -> np.ndarray:
    """Gram matrix [<act(x_i^-1 x_j, f), f>]; positive semidefinite for any
    unitary representation's coefficient."""
    k = len(words)
    g = np.zeros((k, k), dtype=np.complex128)
    for i, wi in enumerate(words):
        wii = wi.inverse()
        for j, wj in enumerate(words):
            g[i, j] = coefficient(multiply(wii, wj), f, f, backend=backend)
    return g
