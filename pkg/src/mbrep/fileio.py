"""JSON file formats: systems (float or exact entries), vectors, quotient
specifications, virtually-free group data, and subgroup dumps.

Omitted map entries are zero maps; "e" or the empty string denotes the
identity word.  Exact files declare a radicand and write scalars as strings
like "1/2", "1/3*rt", or "1/2+1/3*rt", rt standing for the square root of
the radicand.
"""

from __future__ import annotations

import json
import re
from fractions import Fraction
from typing import Dict, Optional, Tuple, Union

import numpy as np

from ._exact import ExactSystem, ExactVector, QuadExt
from .errors import ValidationError
from .multrep import MultVector, RepSpace
from .subgroups import (CosetTable, FiniteGroup, SchreierData,
                        coset_table_from_quotient)
from .system import FormTuple, MatrixSystem
from .vfree import FreeProduct, VFGroupDatum, psl2z_datum
from .words import Alphabet, Word


def _entry_to_complex(entry) -> complex:
    if isinstance(entry, (int, float)):
        return complex(entry)
    if isinstance(entry, list) and len(entry) == 2:
        return complex(entry[0], entry[1])
    raise ValidationError(f"bad matrix entry {entry!r}: expected number or [re, im]")


def _complex_to_entry(z: complex):
    if z.imag == 0.0:
        return z.real
    return [z.real, z.imag]


_RAT = r"-?\d+(?:/\d+)?"
_EXACT_RE = re.compile(rf"^({_RAT})?(?:(?:(?<=.)\+)?({_RAT})\*rt)?$")


def _parse_exact(entry: str, radicand) -> QuadExt:
    text = str(entry).replace(" ", "")
    try:
        return QuadExt(Fraction(text), 0, radicand)
    except ValueError:
        pass
    m = _EXACT_RE.match(text)
    if not m or (m.group(1) is None and m.group(2) is None):
        raise ValidationError(f"bad exact entry {entry!r}")
    a = Fraction(m.group(1)) if m.group(1) else Fraction(0)
    b = Fraction(m.group(2)) if m.group(2) else Fraction(0)
    return QuadExt(a, b, radicand)


def _alphabet_from_doc(doc: dict) -> Alphabet:
    try:
        names = doc["alphabet"]
        pairs = [tuple(p) for p in doc["involution"]]
    except KeyError as err:
        raise ValidationError(f"system file misses field {err}") from None
    return Alphabet(names, pairs)


def load_system(path: str) -> Tuple[MatrixSystem, Optional[FormTuple], Optional[ExactSystem]]:
    """Read a system file; returns the float system, its forms when present,
    and the exact shadow when the file declares exact entries."""
    with open(path) as fh:
        doc = json.load(fh)
    alphabet = _alphabet_from_doc(doc)
    n = len(alphabet)
    dims_doc = doc.get("dims")
    if not isinstance(dims_doc, dict):
        raise ValidationError("system file needs a 'dims' table keyed by letter name")
    dims = [0] * n
    for name, d in dims_doc.items():
        dims[alphabet.letter(name)] = int(d)

    exact = bool(doc.get("exact"))
    radicand = Fraction(str(doc.get("radicand", 1)))

    def parse_matrix(rows, shape) -> Tuple[np.ndarray, Optional[tuple]]:
        if len(rows) != shape[0] or any(len(r) != shape[1] for r in rows):
            raise ValidationError(f"matrix has wrong shape, expected {shape}")
        if exact:
            q = tuple(tuple(_parse_exact(e, radicand) for e in row) for row in rows)
            f = np.array([[float(e) for e in row] for row in q], dtype=np.complex128)
            return f, q
        f = np.array([[_entry_to_complex(e) for e in row] for row in rows],
                     dtype=np.complex128)
        return f, None

    maps: Dict[Tuple[int, int], np.ndarray] = {}
    exact_maps = {}
    for key, rows in (doc.get("maps") or {}).items():
        try:
            bn, an = key.split("|")
        except ValueError:
            raise ValidationError(f"map key {key!r} must look like 'b|a'") from None
        b, a = alphabet.letter(bn), alphabet.letter(an)
        m, q = parse_matrix(rows, (dims[b], dims[a]))
        maps[(b, a)] = m
        if q is not None:
            exact_maps[(b, a)] = q

    forms = None
    exact_forms = {}
    if doc.get("forms"):
        mats = [np.zeros((d, d), dtype=np.complex128) for d in dims]
        for name, rows in doc["forms"].items():
            a = alphabet.letter(name)
            m, q = parse_matrix(rows, (dims[a], dims[a]))
            mats[a] = m
            if q is not None:
                exact_forms[a] = q
        forms = FormTuple(mats)

    system = MatrixSystem(alphabet, dims, maps)
    exact_system = None
    if exact:
        if forms is None:
            raise ValidationError("exact system files must carry forms")
        exact_system = ExactSystem(alphabet, dims, exact_maps, exact_forms, radicand)
    return system, forms, exact_system


def save_system(path: str, system: MatrixSystem, forms: Optional[FormTuple] = None) -> None:
    alphabet = system.alphabet
    names = alphabet.names
    pairs = []
    seen = set()
    for i, j in enumerate(alphabet.inv):
        if i not in seen:
            pairs.append([names[i], names[j]])
            seen.update((i, j))
    doc = {
        "alphabet": list(names),
        "involution": pairs,
        "dims": {names[a]: system.dims[a] for a in range(len(alphabet))},
        "maps": {},
    }
    for b, a, m in system.nonzero_pairs():
        doc["maps"][f"{names[b]}|{names[a]}"] = [[_complex_to_entry(z) for z in row]
                                                 for row in m.tolist()]
    if forms is not None:
        doc["forms"] = {names[a]: [[_complex_to_entry(z) for z in row]
                                   for row in forms[a].tolist()]
                        for a in range(len(alphabet))}
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def load_vector(path: str, space: RepSpace) -> Union[MultVector, Tuple[MultVector, ExactVector]]:
    with open(path) as fh:
        doc = json.load(fh)
    depth = int(doc.get("depth", 0))
    values = {}
    for text, entries in (doc.get("values") or {}).items():
        w = Word.parse(space.alphabet, text)
        values[w] = np.array([_entry_to_complex(e) for e in entries], dtype=np.complex128)
    return MultVector(space, depth, values)


def load_exact_vector(path: str, exact_system: ExactSystem) -> ExactVector:
    with open(path) as fh:
        doc = json.load(fh)
    depth = int(doc.get("depth", 0))
    values = {}
    for text, entries in (doc.get("values") or {}).items():
        w = Word.parse(exact_system.alphabet, text)
        values[w] = tuple(_parse_exact(str(e), exact_system.radicand) for e in entries)
    return ExactVector(exact_system, depth, values)


def save_vector(path: str, vector: MultVector) -> None:
    doc = {
        "depth": vector.depth,
        "values": {str(w): [_complex_to_entry(z) for z in v.tolist()]
                   for w, v in sorted(vector.values.items(), key=lambda kv: kv[0].letters)},
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def load_quotient(path: str, alphabet: Alphabet) -> CosetTable:
    """Quotient specification: a finite group (cyclic order or multiplication
    table) and letter images; the subgroup is the kernel."""
    with open(path) as fh:
        doc = json.load(fh)
    spec = doc.get("quotient")
    if not isinstance(spec, dict):
        raise ValidationError("quotient file needs a 'quotient' object")
    if "cyclic" in spec:
        group = FiniteGroup.cyclic(int(spec["cyclic"]))
    elif "table" in spec:
        group = FiniteGroup(spec["table"])
    else:
        raise ValidationError("quotient needs either 'cyclic' or 'table' order data")
    images_doc = spec.get("images")
    if not isinstance(images_doc, dict):
        raise ValidationError("quotient needs an 'images' table keyed by letter name")
    images = {alphabet.letter(name): int(v) for name, v in images_doc.items()}
    return coset_table_from_quotient(alphabet, group, images)


def dump_schreier(path: str, data: SchreierData) -> None:
    names = data.table.alphabet.names
    doc = {
        "index": data.index,
        "rank": data.rank,
        "transversal": [str(t) for t in data.transversal],
        "generators": {data.subgroup_alphabet.names[j]: str(w)
                       for j, w in enumerate(data.generator_words)},
        "pairs": {names[a]: [[str(data.transversal[u]), data.subgroup_alphabet.names[j]]
                             for u, j in data.pairs[a]]
                  for a in range(len(names))},
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def load_vf_datum(path_or_name: str) -> VFGroupDatum:
    if path_or_name == "psl2z":
        return psl2z_datum()
    with open(path_or_name) as fh:
        doc = json.load(fh)
    group = FreeProduct([int(m) for m in doc["factors"]], list(doc["generators"]))
    transversal = [group.parse(t) for t in doc["transversal"]]
    basis_texts = list(doc["free_basis"])
    alphabet = Alphabet.rank(len(basis_texts))
    basis = []
    for t in basis_texts:
        el = group.parse(t)
        basis.extend([el, group.inverse(el)])
    t_pos = {group.format(t): i for i, t in enumerate(transversal)}
    gen_pos = {nm: i for i, nm in enumerate(group.names)}
    table = {}
    for key, val in doc["table"].items():
        t_txt, s_txt = key.split("|")
        word = Word.parse(alphabet, val[1])
        table[(t_pos[t_txt], gen_pos[s_txt])] = (word, t_pos[val[0]])
    return VFGroupDatum(group, transversal, alphabet, basis, table,
                        name=doc.get("name", ""))
