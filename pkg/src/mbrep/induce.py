"""Block induction of a matrix system from a finite-index subgroup to the
ambient free group, the unitary intertwiner onto the induced system's
multiplicative vectors, and the boundary action on the induced picture.

The induced letter space at ``a`` is the direct sum over pairs (u, c') of a
transversal element and a subgroup generator whose combination u^-1 c' starts
with ``a``; the induced map carries a block either by copying (when the
shifted transversal element stays inside the transversal tree) or by applying
the subgroup map attached to the unique Schreier generator crossing the tree
boundary.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from .errors import DepthError, LayoutError, ValidationError
from .multrep import (MultVector, RepSpace, act, cylinder_op, deepen, evaluate,
                      inner, vadd, vscale, zero_vector)
from .subgroups import SchreierData, expand_from_subgroup, rewrite_to_subgroup
from .system import FormTuple, MatrixSystem
from .words import Alphabet, Cylinder, Word, cylinder_image, multiply, sphere


@dataclass
class InducedLayout:
    """Block bookkeeping of the induced letter spaces.

    For each ambient letter: the ordered (transversal index, generator index)
    pairs, the offset of each block, and the block dimensions.
    """

    pairs: List[List[Tuple[int, int]]]
    offsets: List[List[int]]
    block_dims: List[List[int]]
    slot: List[Dict[Tuple[int, int], int]]

    def letter_dim(self, a: int) -> int:
        if not self.pairs[a]:
            return 0
        return self.offsets[a][-1] + self.block_dims[a][-1]

    def locate(self, a: int, u_idx: int, gen_idx: int) -> Tuple[int, int]:
        k = self.slot[a].get((u_idx, gen_idx))
        if k is None:
            raise LayoutError(
                f"pair (transversal {u_idx}, generator {gen_idx}) missing under letter {a}")
        return self.offsets[a][k], self.block_dims[a][k]


def _build_layout(data: SchreierData, sub_dims: Tuple[int, ...]) -> InducedLayout:
    n = len(data.table.alphabet)
    pairs: List[List[Tuple[int, int]]] = [list(data.pairs[a]) for a in range(n)]
    offsets: List[List[int]] = []
    block_dims: List[List[int]] = []
    slot: List[Dict[Tuple[int, int], int]] = []
    for a in range(n):
        offs, dims, pos = [], [], {}
        run = 0
        for k, (u_idx, j) in enumerate(pairs[a]):
            offs.append(run)
            dims.append(sub_dims[j])
            pos[(u_idx, j)] = k
            run += sub_dims[j]
        offsets.append(offs)
        block_dims.append(dims)
        slot.append(pos)
    return InducedLayout(pairs, offsets, block_dims, slot)


def induce_system(sub_system: MatrixSystem, sub_forms: FormTuple,
                  data: SchreierData) -> Tuple[MatrixSystem, FormTuple, InducedLayout]:
    """Induced matrix system over the ambient alphabet, with block-diagonal
    induced forms; compatibility of the output forms is inherited from the
    input (and checked by the callers' tests, not assumed silently).
    """
    if sub_system.alphabet != data.subgroup_alphabet:
        raise ValidationError("subgroup system is not over the Schreier generator alphabet")
    alphabet = data.table.alphabet
    n = len(alphabet)
    inv = alphabet.inv
    sub_inv = data.subgroup_alphabet.inv
    layout = _build_layout(data, sub_system.dims)
    dims = [layout.letter_dim(a) for a in range(n)]

    rep_words = {t.letters: i for i, t in enumerate(data.transversal)}

    maps: Dict[Tuple[int, int], np.ndarray] = {}
    for b in range(n):
        for a in range(n):
            if inv[a] == b:
                continue
            db, da = dims[b], dims[a]
            if db == 0 or da == 0:
                continue
            block = np.zeros((db, da), dtype=np.complex128)
            filled = False
            for row_k, (v_idx, jd) in enumerate(layout.pairs[b]):
                r_off = layout.offsets[b][row_k]
                r_dim = layout.block_dims[b][row_k]
                v = data.transversal[v_idx]
                va = multiply(v, Word(alphabet, (inv[a],)))
                hit = rep_words.get(va.letters)
                if hit is not None:
                    # copy block: the shifted element stays inside the tree
                    c_off, c_dim = layout.locate(a, hit, jd)
                    if c_dim != r_dim:
                        raise LayoutError("copy block dimensions disagree")
                    block[r_off:r_off + r_dim, c_off:c_off + c_dim] = np.eye(r_dim)
                    filled = True
                else:
                    coset = data.table.walk(va)
                    u_idx = data.transversal_of_coset(coset)
                    u = data.transversal[u_idx]
                    gen = multiply(multiply(u, Word(alphabet, (a,))), v.inverse())
                    jc = data.generator_index(gen)
                    if jc is None:
                        raise LayoutError(f"crossing element {gen} is not a Schreier generator")
                    if sub_inv[jc] == jd:
                        raise LayoutError("crossing generator pairs with an inverse letter")
                    c_off, c_dim = layout.locate(a, u_idx, jc)
                    m = sub_system.maps[jd][jc]
                    if m is None:
                        filled = True  # structurally zero subgroup map
                        continue
                    block[r_off:r_off + r_dim, c_off:c_off + c_dim] = m
                    filled = True
            if filled and np.any(block != 0):
                maps[(b, a)] = block

    forms = []
    for a in range(n):
        f = np.zeros((dims[a], dims[a]), dtype=np.complex128)
        for k, (u_idx, j) in enumerate(layout.pairs[a]):
            off = layout.offsets[a][k]
            d = layout.block_dims[a][k]
            f[off:off + d, off:off + d] = sub_forms[j]
        forms.append(f)

    return MatrixSystem(alphabet, dims, maps), FormTuple(forms), layout


class InducedVector:
    """Element of the induced space in block form: one subgroup-side vector
    per transversal element (functions on the group, equivariant under right
    subgroup translation, determined by their transversal values)."""

    def __init__(self, data: SchreierData, space: RepSpace,
                 blocks: Dict[int, MultVector]):
        self.data = data
        self.space = space
        self.blocks = {u: v for u, v in blocks.items() if not v.is_zero()}

    def block(self, u_idx: int, depth: int = 1) -> MultVector:
        v = self.blocks.get(u_idx)
        if v is None:
            return zero_vector(self.space, depth)
        return v


def _decompose_element(data: SchreierData, g: Word) -> Tuple[int, Word]:
    """g = u . h with u in the transversal and h in the subgroup."""
    coset = data.table.walk(g)
    u_idx = data.transversal_of_coset(coset)
    h = multiply(data.transversal[u_idx].inverse(), g)
    return u_idx, h


def induced_inner(f: InducedVector, g: InducedVector) -> complex:
    total = 0.0 + 0.0j
    for u, fv in f.blocks.items():
        gv = g.blocks.get(u)
        if gv is not None:
            total += inner(fv, gv)
    return complex(total)


def induced_action(x: Word, f: InducedVector) -> InducedVector:
    """The induced representation acting in block form."""
    xinv = x.inverse()
    blocks: Dict[int, MultVector] = {}
    for u_idx in range(len(f.data.transversal)):
        g = multiply(xinv, f.data.transversal[u_idx])
        src_idx, h = _decompose_element(f.data, g)
        src = f.blocks.get(src_idx)
        if src is None:
            continue
        word_h = rewrite_to_subgroup(h, f.data)
        moved = act(word_h.inverse(), src)
        if not moved.is_zero():
            blocks[u_idx] = moved
    return InducedVector(f.data, f.space, blocks)


def intertwiner_J(f: InducedVector, layout: InducedLayout,
                  induced_space: RepSpace, depth: Optional[int] = None,
                  max_depth: int = 16) -> MultVector:
    """The unitary identification of the induced space with the induced
    system's multiplicative vectors: the value at a word x.a collects, block
    by block, the source function at x u^-1 evaluated on the crossing
    generator.

    With ``depth=None`` the presentation depth grows until every block
    evaluation is inside its propagation range.
    """
    if depth is not None:
        return _intertwine_at(f, layout, induced_space, depth)
    last_err: Optional[Exception] = None
    for d in range(1, max_depth + 1):
        try:
            return _intertwine_at(f, layout, induced_space, d)
        except DepthError as err:
            last_err = err
    raise DepthError(f"no admissible presentation depth up to {max_depth}: {last_err}")


def _intertwine_at(f: InducedVector, layout: InducedLayout,
                   induced_space: RepSpace, depth: int) -> MultVector:
    data = f.data
    alphabet = data.table.alphabet
    inverses = [t.inverse() for t in data.transversal]
    values: Dict[Word, np.ndarray] = {}
    # (prefix, transversal) decompositions are shared across the last letter
    # and the generator of each block
    cache: Dict[Tuple[Tuple[int, ...], int], Tuple[int, Word]] = {}

    def routed(x: Word, u_idx: int) -> Tuple[int, Word]:
        key = (x.letters, u_idx)
        hit = cache.get(key)
        if hit is None:
            src_idx, h = _decompose_element(data, multiply(x, inverses[u_idx]))
            hit = (src_idx, rewrite_to_subgroup(h, data))
            cache[key] = hit
        return hit

    for y in sphere(alphabet, depth):
        a = y.last()
        x = Word(alphabet, y.letters[:-1])
        out = np.zeros(layout.letter_dim(a), dtype=np.complex128)
        any_nonzero = False
        for k, (u_idx, j) in enumerate(layout.pairs[a]):
            src_idx, base = routed(x, u_idx)
            src = f.blocks.get(src_idx)
            if src is None:
                continue
            arg = multiply(base, Word(data.subgroup_alphabet, (j,)))
            if len(arg) < src.depth:
                raise DepthError(f"depth {depth} too small to evaluate block at {y}")
            val = evaluate(src, arg)
            off = layout.offsets[a][k]
            d = layout.block_dims[a][k]
            if np.any(val != 0):
                out[off:off + d] = val
                any_nonzero = True
        if any_nonzero:
            values[y] = out
    return MultVector(induced_space, depth, values)


def boundary_pullback(data: SchreierData, z: Word) -> List[Word]:
    """Stems of the subgroup-side cylinders whose image under the boundary
    identification lies in the ambient cylinder at ``z``.

    Depth |z| always suffices: the entry vertex of the k-th tree tile along a
    reduced generator word lies on the limit geodesic at distance >= k, so
    membership is decided by comparing it with the stem.
    """
    if z.is_identity():
        raise ValidationError("pullback needs a nonempty stem")
    sub_alphabet = data.subgroup_alphabet
    alphabet = data.table.alphabet
    k_target = len(z)
    out: List[Word] = []

    def walk(prefix: Tuple[int, ...], g: Word) -> None:
        depth = len(prefix)
        if depth == k_target:
            return
        last_forbidden = sub_alphabet.inv[prefix[-1]] if prefix else -1
        for j in range(len(sub_alphabet)):
            if j == last_forbidden:
                continue
            u_idx, mid, _v_idx = data.generator_factors[j]
            entry = multiply(g, multiply(data.transversal[u_idx],
                                         Word(alphabet, (mid,))))
            new_prefix = prefix + (j,)
            if depth + 1 == k_target:
                if len(entry) < k_target:
                    raise LayoutError("entry vertex shorter than the tile count")
                if entry.letters[:k_target] == z.letters:
                    out.append(Word(sub_alphabet, new_prefix))
            else:
                walk(new_prefix, multiply(g, data.generator_words[j]))

    walk((), Word.identity(alphabet))
    return out


def induced_boundary_op(f: InducedVector, z: Word) -> InducedVector:
    """Boundary multiplication by the ambient cylinder indicator at ``z`` in
    block form: each block gets the indicator translated by its transversal
    element and pulled back through the boundary identification.

    This is an implementation independent of the intertwiner, so agreement of
    the two routes is a substantive check.
    """
    data = f.data
    blocks: Dict[int, MultVector] = {}
    for u_idx, src in f.blocks.items():
        u_inv = data.transversal[u_idx].inverse()
        acc = zero_vector(f.space, src.depth)
        for part in cylinder_image(u_inv, Cylinder(z)):
            for stem in boundary_pullback(data, part.stem):
                acc = vadd(acc, cylinder_op(stem, src))
        if not acc.is_zero():
            blocks[u_idx] = acc
    return InducedVector(data, f.space, blocks)


def induced_distance(f: InducedVector, g: InducedVector) -> float:
    """Norm distance in the induced space."""
    total = 0.0
    keys = set(f.blocks) | set(g.blocks)
    for u in keys:
        fv = f.blocks.get(u)
        gv = g.blocks.get(u)
        if fv is None:
            diff = gv
        elif gv is None:
            diff = fv
        else:
            diff = vadd(fv, vscale(-1.0, gv))
        total += max(inner(diff, diff).real, 0.0)
    return float(np.sqrt(total))
