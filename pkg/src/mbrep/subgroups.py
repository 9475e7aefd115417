"""Finite-index subgroups of free groups: coset tables from finite-quotient
homomorphisms, prefix-closed Schreier transversals, symmetrized Schreier
generator sets, and the per-letter block index sets used by induction.

Subgroups are specified as kernels (more generally, preimages of the trivial
subgroup) of homomorphisms onto finite groups; this keeps membership and
rewriting trivially correct.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import MembershipError, ValidationError
from .words import Alphabet, Word, multiply


class FiniteGroup:
    """Finite group given by its multiplication table (element 0 is the
    identity)."""

    def __init__(self, table: Sequence[Sequence[int]]):
        t = np.asarray(table, dtype=np.int64)
        n = t.shape[0]
        if t.shape != (n, n):
            raise ValidationError(f"multiplication table must be square, got {t.shape}")
        if not (np.all(t[0] == np.arange(n)) and np.all(t[:, 0] == np.arange(n))):
            raise ValidationError("element 0 must be the identity")
        for g in range(n):
            if sorted(t[g]) != list(range(n)) or sorted(t[:, g]) != list(range(n)):
                raise ValidationError(f"row/column {g} is not a permutation")
        self.table = t
        self.order = n
        inv = np.full(n, -1, dtype=np.int64)
        for g in range(n):
            for h in range(n):
                if t[g, h] == 0:
                    inv[g] = h
        self.inverse = inv

    @classmethod
    def cyclic(cls, m: int) -> "FiniteGroup":
        if m < 1:
            raise ValidationError("cyclic order must be >= 1")
        return cls([[(i + j) % m for j in range(m)] for i in range(m)])

    def mul(self, g: int, h: int) -> int:
        return int(self.table[g, h])


class CosetTable:
    """Right action of the letters on the cosets of a finite-index subgroup;
    the basepoint coset 0 is the subgroup itself."""

    def __init__(self, alphabet: Alphabet, action: np.ndarray):
        action = np.asarray(action, dtype=np.int64)
        n, na = action.shape
        if na != len(alphabet):
            raise ValidationError("action table has wrong number of letter columns")
        self.alphabet = alphabet
        self.action = action
        self.index = n
        self._check()

    def _check(self) -> None:
        n = self.index
        for c in range(len(self.alphabet)):
            col = self.action[:, c]
            if sorted(col) != list(range(n)):
                raise ValidationError(f"letter {self.alphabet.names[c]} does not permute the cosets")
        for c in range(len(self.alphabet)):
            ci = self.alphabet.inv[c]
            for s in range(n):
                if self.action[self.action[s, c], ci] != s:
                    raise ValidationError("inverse letters do not act inversely")
        seen = {0}
        frontier = [0]
        while frontier:
            s = frontier.pop()
            for c in range(len(self.alphabet)):
                t = int(self.action[s, c])
                if t not in seen:
                    seen.add(t)
                    frontier.append(t)
        if len(seen) != n:
            raise ValidationError("coset graph is not connected")

    def step(self, coset: int, letter: int) -> int:
        return int(self.action[coset, letter])

    def walk(self, w: Word, start: int = 0) -> int:
        s = start
        for c in w.letters:
            s = int(self.action[s, c])
        return s

    def contains(self, w: Word) -> bool:
        """Membership of a word in the subgroup."""
        return self.walk(w) == 0


def coset_table_from_quotient(alphabet: Alphabet, group: FiniteGroup,
                              images: Dict[int, int]) -> CosetTable:
    """Coset table of the kernel of the homomorphism sending each letter to
    the given group element.

    Images may be supplied for one letter of each inverse pair; supplied
    pairs must map to inverse elements.  The cosets enumerate the subgroup of
    the quotient generated by the images (all of it, for surjections).
    """
    full: Dict[int, int] = {}
    for c, img in images.items():
        if not 0 <= img < group.order:
            raise ValidationError(f"image {img} outside the group of order {group.order}")
        ci = alphabet.inv[c]
        full[c] = img
        want = int(group.inverse[img])
        if ci in images and images[ci] != want:
            raise ValidationError(
                f"letters {alphabet.names[c]},{alphabet.names[ci]} do not map to inverse elements")
        full.setdefault(ci, want)
    missing = [alphabet.names[c] for c in range(len(alphabet)) if c not in full]
    if missing:
        raise ValidationError(f"no image for letters {missing}")

    # enumerate the image subgroup
    elements = [0]
    seen = {0}
    queue = [0]
    while queue:
        g = queue.pop()
        for c in range(len(alphabet)):
            h = group.mul(g, full[c])
            if h not in seen:
                seen.add(h)
                elements.append(h)
                queue.append(h)
    elements.sort()
    pos = {g: i for i, g in enumerate(elements)}
    action = np.zeros((len(elements), len(alphabet)), dtype=np.int64)
    for i, g in enumerate(elements):
        for c in range(len(alphabet)):
            action[i, c] = pos[group.mul(g, full[c])]
    # relabel so the identity coset is 0
    if pos[0] != 0:
        perm = list(range(len(elements)))
        perm[0], perm[pos[0]] = perm[pos[0]], perm[0]
        inv_perm = np.argsort(perm)
        action = inv_perm[action[perm]]
    return CosetTable(alphabet, action)


@dataclass
class SchreierData:
    """Prefix-closed transversal, symmetrized Schreier generators as a fresh
    rank-r alphabet, and the per-letter block index pairs.

    ``generator_factors[j]`` is the triple (u, c, v) of transversal indices
    and the middle letter with generator j equal to u . c . v^-1; the pairs
    under Gamma-letter ``a`` are exactly those (u, j) whose reduced word
    u^-1 . gen_j starts with ``a``.
    """

    table: CosetTable
    transversal: List[Word]
    subgroup_alphabet: Alphabet
    generator_words: List[Word]
    generator_factors: List[Tuple[int, int, int]]
    pairs: List[List[Tuple[int, int]]]
    _gen_index: Dict[Tuple[int, ...], int]
    _coset_of_transversal: List[int]
    _transversal_of_coset: List[int]

    @property
    def index(self) -> int:
        return self.table.index

    @property
    def rank(self) -> int:
        return len(self.subgroup_alphabet) // 2

    def transversal_of_coset(self, coset: int) -> int:
        return self._transversal_of_coset[coset]

    def generator_index(self, w: Word) -> Optional[int]:
        return self._gen_index.get(w.letters)

    def pair_words(self, a: int) -> List[Word]:
        """The reduced words u^-1 . gen indexing the blocks at letter a."""
        out = []
        for u_idx, j in self.pairs[a]:
            out.append(multiply(self.transversal[u_idx].inverse(), self.generator_words[j]))
        return out


def schreier(table: CosetTable) -> SchreierData:
    """Breadth-first shortlex transversal, Schreier generators, and block
    pairs for a coset table.

    The transversal is prefix-closed by construction (a subtree containing
    the identity); the generators are the nontrivial u . c . rep(uc)^-1,
    symmetrized, with inverse pairs adjacent in shortlex order.
    """
    alphabet = table.alphabet
    n_letters = len(alphabet)

    rep_of_coset: List[Optional[Word]] = [None] * table.index
    rep_of_coset[0] = Word.identity(alphabet)
    order: List[int] = [0]
    head = 0
    while head < len(order):
        s = order[head]
        head += 1
        u = rep_of_coset[s]
        for c in range(n_letters):
            t = table.step(s, c)
            if rep_of_coset[t] is None:
                rep_of_coset[t] = multiply(u, Word(alphabet, (c,)))
                order.append(t)
    if any(r is None for r in rep_of_coset):
        raise ValidationError("coset table is not connected")

    transversal = [rep_of_coset[s] for s in order]
    coset_of_transversal = list(order)
    transversal_of_coset = [0] * table.index
    for i, s in enumerate(order):
        transversal_of_coset[s] = i

    # nontrivial Schreier generators with their (u, c, v) factorizations
    raw: Dict[Tuple[int, ...], Tuple[Word, int, int, int]] = {}
    for u_idx, u in enumerate(transversal):
        s = coset_of_transversal[u_idx]
        for c in range(n_letters):
            t = table.step(s, c)
            v_idx = transversal_of_coset[t]
            v = transversal[v_idx]
            gen = multiply(multiply(u, Word(alphabet, (c,))), v.inverse())
            if gen.is_identity():
                continue
            if gen.letters not in raw:
                raw[gen.letters] = (gen, u_idx, c, v_idx)

    def shortlex_key(letters: Tuple[int, ...]):
        return (len(letters), letters)

    ordered = sorted(raw, key=shortlex_key)
    placed: List[Tuple[int, ...]] = []
    placed_set = set()
    inv_of: Dict[Tuple[int, ...], Tuple[int, ...]] = {}
    for letters in ordered:
        gen = raw[letters][0]
        inv_letters = gen.inverse().letters
        if inv_letters not in raw:
            raise ValidationError("generator set is not closed under inversion")
        inv_of[letters] = inv_letters
        if letters in placed_set:
            continue
        placed.append(letters)
        placed.append(inv_letters)
        placed_set.add(letters)
        placed_set.add(inv_letters)

    rank = len(placed) // 2
    expected_rank = 1 + table.index * (n_letters // 2 - 1)
    if rank != expected_rank:
        raise ValidationError(
            f"Schreier generator count {len(placed)} contradicts the rank formula "
            f"(expected rank {expected_rank})")
    sub_alphabet = Alphabet.rank(rank)
    generator_words = [raw[letters][0] for letters in placed]
    generator_factors = [(raw[letters][1], raw[letters][2], raw[letters][3])
                         for letters in placed]
    gen_index = {letters: j for j, letters in enumerate(placed)}

    pairs: List[List[Tuple[int, int]]] = [[] for _ in range(n_letters)]
    for u_idx in range(len(transversal)):
        u_inv = transversal[u_idx].inverse()
        for j, gw in enumerate(generator_words):
            w = multiply(u_inv, gw)
            if w.is_identity():
                raise ValidationError("transversal meets the subgroup away from the identity")
            pairs[w.first()].append((u_idx, j))

    return SchreierData(table, transversal, sub_alphabet, generator_words,
                        generator_factors, pairs, gen_index,
                        coset_of_transversal, transversal_of_coset)


def rewrite_to_subgroup(w: Word, data: SchreierData) -> Word:
    """Express a subgroup element as a reduced word over the Schreier
    generator alphabet; expansion recovers the original element."""
    table = data.table
    if not table.contains(w):
        raise MembershipError(f"{w} is not in the subgroup")
    out = Word.identity(data.subgroup_alphabet)
    s = 0
    for c in w.letters:
        u_idx = data.transversal_of_coset(s)
        t = table.step(s, c)
        v_idx = data.transversal_of_coset(t)
        gen = multiply(multiply(data.transversal[u_idx], Word(table.alphabet, (c,))),
                       data.transversal[v_idx].inverse())
        if not gen.is_identity():
            j = data.generator_index(gen)
            if j is None:
                raise ValidationError("rewriting met an unknown Schreier generator")
            out = multiply(out, Word(data.subgroup_alphabet, (j,)))
        s = t
    return out


def expand_from_subgroup(w: Word, data: SchreierData) -> Word:
    """Inverse of rewriting: evaluate a generator-alphabet word in the free
    group."""
    out = Word.identity(data.table.alphabet)
    for j in w.letters:
        out = multiply(out, data.generator_words[j])
    return out
