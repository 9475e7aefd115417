"""Command-line surface: normalize, decompose, coefficients, induce,
vf-induce, herz, demo-no-hc, selftest.

Exit codes: 0 success, 1 validation failure, 2 mathematical-invariant
failure, 3 resource cap.  CSV output uses '.' decimals with 15 significant
digits and records the seed in its header, so identical configurations give
byte-identical reports.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from importlib import resources
from typing import List, Optional, Sequence

import numpy as np

from . import _kernels, fileio
from ._exact import exact_coefficient
from .boundary_measure import (herz_check, no_harish_chandra_demo,
                               quasi_regular_coefficient, spectral_measure,
                               uniform_measure)
from .errors import (CapExceededError, DegenerateSystemError, MbrepError,
                     NormalizationError, ValidationError)
from .induce import (InducedVector, induce_system, induced_action,
                     induced_boundary_op, induced_inner, intertwiner_J)
from .multrep import (MultVector, RepSpace, act, coefficient, cylinder_op,
                      deepen, distance, inner)
from .subgroups import schreier
from .system import (compatibility_residual, decompose, normalize,
                     radical_quotient, validate)
from .vfree import induce_to_vf, vf_gram, vf_validate
from .words import DEFAULT_CAP, Word, ball, sphere

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_MATH = 2
EXIT_CAP = 3


def _resolve(path: str) -> str:
    if path.startswith("builtin:"):
        name = path.split(":", 1)[1]
        return str(resources.files("mbrep").joinpath("data", f"{name}.json"))
    return path


def _fmt(x: float) -> str:
    return f"{float(x):.15g}"


class Report:
    """CSV with '# key=value' header comments; deterministic formatting."""

    def __init__(self, columns: Sequence[str], meta: dict):
        self.columns = list(columns)
        self.meta = dict(meta)
        self.rows: List[List[str]] = []

    def add(self, *cells) -> None:
        out = []
        for c in cells:
            if isinstance(c, float):
                out.append(_fmt(c))
            else:
                out.append(str(c))
        self.rows.append(out)

    def render(self) -> str:
        lines = [f"# {k}={v}" for k, v in self.meta.items()]
        lines.append(",".join(self.columns))
        lines.extend(",".join(r) for r in self.rows)
        return "\n".join(lines) + "\n"

    def write(self, output: Optional[str]) -> None:
        text = self.render()
        if output:
            with open(output, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)


def _load_space(path: str) -> RepSpace:
    system, forms, _ = fileio.load_system(_resolve(path))
    problems = validate(system)
    if problems:
        raise ValidationError("; ".join(problems))
    if forms is None:
        raise ValidationError(f"system file {path} carries no forms; run normalize first")
    return RepSpace(system, forms)


def _common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tolerance", type=float, default=None, help="override the default tolerance")
    p.add_argument("--cap", type=int, default=DEFAULT_CAP, help="word-enumeration cap")
    p.add_argument("--seed", type=int, default=0, help="seed for randomized checks")
    p.add_argument("--threads", type=int, default=1,
                   help="worker threads for independent evaluations (results are thread-count independent)")
    p.add_argument("--backend", choices=["fast", "brute", "both"], default="fast")
    p.add_argument("--output", default=None, help="output file (reports default to stdout)")


def cmd_normalize(args) -> int:
    system, _, _ = fileio.load_system(_resolve(args.input))
    problems = validate(system)
    if problems:
        for p in problems:
            print(f"invalid: {p}", file=sys.stderr)
        return EXIT_VALIDATION
    tol = args.tolerance if args.tolerance else 1e-10
    result = normalize(system, tol=tol, seed=args.seed)
    print(f"spectral_radius={_fmt(result.spectral_radius)}")
    print(f"residual={_fmt(result.residual)}")
    if result.degenerate:
        print("warning: leading transfer eigenvalue is (near-)degenerate", file=sys.stderr)
    if args.output:
        fileio.save_system(args.output, result.system, result.forms)
        print(f"wrote {args.output}")
    return EXIT_OK


def cmd_decompose(args) -> int:
    space = _load_space(args.input)
    system, forms = space.system, space.forms
    if forms.min_eigenvalue() <= 1e-10 * max(forms.max_abs(), 1.0):
        system, forms = radical_quotient(system, forms)
        if sum(system.dims) == 0:
            print("system is entirely radical: quotient has dimension zero", file=sys.stderr)
            return EXIT_MATH
        print(f"radical quotient applied; dims now {system.dims}")
    components = decompose(system, forms, seed=args.seed)
    total = sum(sum(c.system.dims) for c in components)
    print(f"components={len(components)}")
    for k, comp in enumerate(components):
        print(f"component {k}: dims={comp.system.dims}")
        if args.output:
            path = f"{args.output.removesuffix('.json')}-{k}.json"
            fileio.save_system(path, comp.system, comp.forms)
            print(f"wrote {path}")
    if total != sum(system.dims):
        print("component dimensions do not add up", file=sys.stderr)
        return EXIT_MATH
    return EXIT_OK


def cmd_coefficients(args) -> int:
    space = _load_space(args.system)
    vec = fileio.load_vector(_resolve(args.vector), space)
    texts = [t for t in (args.words.split(",") if args.words else []) if t != ""]
    words = [Word.parse(space.alphabet, t) for t in texts]
    meta = {"command": "coefficients", "backend": args.backend, "seed": args.seed,
            "depth": vec.depth, "kernel": _kernels.backend_name()}
    columns = ["word", "re", "im", "backend", "depth"]
    if args.backend == "both":
        columns.append("discrepancy")
    report = Report(columns, meta)

    def one(w: Word):
        if args.backend == "both":
            fast = coefficient(w, vec, vec, backend="fast", cap=args.cap)
            brute = coefficient(w, vec, vec, backend="brute", cap=args.cap)
            return w, fast, abs(fast - brute)
        val = coefficient(w, vec, vec, backend=args.backend, cap=args.cap)
        return w, val, None

    if args.threads > 1:
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            results = list(pool.map(one, words))
    else:
        results = [one(w) for w in words]
    for w, val, disc in results:
        row = [str(w), _fmt(val.real), _fmt(val.imag), args.backend,
               str(vec.depth + len(w) + 1)]
        if disc is not None:
            row.append(_fmt(disc))
        report.add(*row)
    report.write(args.output)
    return EXIT_OK


def cmd_induce(args) -> int:
    sub_system, sub_forms, _ = fileio.load_system(_resolve(args.system))
    if sub_forms is None:
        raise ValidationError("subgroup system needs forms")
    base = fileio.load_quotient(_resolve(args.quotient), _alphabet_for_quotient(args))
    data = schreier(base)
    if sub_system.alphabet != data.subgroup_alphabet:
        raise ValidationError(
            f"subgroup system alphabet has rank {len(sub_system.alphabet) // 2}, "
            f"the subgroup has rank {data.rank}")
    ind_system, ind_forms, layout = induce_system(sub_system, sub_forms, data)
    print(f"induced dims={ind_system.dims} total={sum(ind_system.dims)} "
          f"(index {data.index} x subgroup total {sum(sub_system.dims)})")
    problems = validate(ind_system)
    if problems:
        for p in problems:
            print(f"invalid induced system: {p}", file=sys.stderr)
        return EXIT_MATH
    res = compatibility_residual(ind_system, ind_forms)
    print(f"induced_forms_residual={_fmt(res)}")
    tol = args.tolerance if args.tolerance else 1e-9
    ok = res <= tol

    sub_space = RepSpace(sub_system, sub_forms)
    ind_space = RepSpace(ind_system, ind_forms)
    rng = np.random.default_rng(args.seed)
    worst_inner = worst_act = worst_bdry = 0.0
    test_words = [w for r in range(1, 3) for w in sphere(ind_space.alphabet, r)]
    for trial in range(args.trials):
        blocks = {}
        for u in range(data.index):
            vals = {}
            for w in sphere(sub_space.alphabet, 1):
                d = sub_space.dim(w.last())
                vals[w] = rng.normal(size=d) + 1j * rng.normal(size=d)
            blocks[u] = MultVector(sub_space, 1, vals)
        f = InducedVector(data, sub_space, blocks)
        jf = intertwiner_J(f, layout, ind_space)
        worst_inner = max(worst_inner, abs(inner(jf, jf) - induced_inner(f, f)))
        x = Word(ind_space.alphabet,
                 [int(rng.integers(len(ind_space.alphabet)))])
        lhs = intertwiner_J(induced_action(x, f), layout, ind_space)
        rhs = act(x, jf)
        d = max(lhs.depth, rhs.depth)
        worst_act = max(worst_act, distance(deepen(lhs, d), deepen(rhs, d)))
        z = test_words[int(rng.integers(len(test_words)))]
        lhsb = intertwiner_J(induced_boundary_op(f, z), layout, ind_space)
        rhsb = cylinder_op(z, jf)
        d = max(lhsb.depth, rhsb.depth)
        worst_bdry = max(worst_bdry, distance(deepen(lhsb, d), deepen(rhsb, d)))
    jtol = 1e-10 * (1 + data.index)
    print(f"J_inner_defect={_fmt(worst_inner)}")
    print(f"J_intertwine_defect={_fmt(worst_act)}")
    print(f"J_boundary_defect={_fmt(worst_bdry)}")
    ok = ok and worst_inner <= jtol and worst_act <= jtol and worst_bdry <= jtol
    if args.output:
        fileio.save_system(args.output, ind_system, ind_forms)
        fileio.dump_schreier(f"{args.output.removesuffix('.json')}-layout.json", data)
        print(f"wrote {args.output}")
    if not ok:
        print("induction invariants failed", file=sys.stderr)
        return EXIT_MATH
    return EXIT_OK


def _alphabet_for_quotient(args):
    system, _, _ = fileio.load_system(_resolve(args.base_system)) if args.base_system else (None, None, None)
    if system is not None:
        return system.alphabet
    from .words import Alphabet

    return Alphabet.rank(args.base_rank)


def cmd_vf_induce(args) -> int:
    datum = fileio.load_vf_datum(args.datum if args.datum == "psl2z" else _resolve(args.datum))
    problems = vf_validate(datum, seed=args.seed)
    if problems:
        for p in problems:
            print(f"invalid datum: {p}", file=sys.stderr)
        return EXIT_VALIDATION
    space = _load_space(args.system)
    if space.alphabet != datum.basis_alphabet:
        raise ValidationError("system alphabet does not match the free-basis alphabet")
    vec = fileio.load_vector(_resolve(args.vector), space)
    blocks = {0: vec}
    grp = datum.group

    def coeff(w, u, v):
        return coefficient(w, u, v, backend=args.backend if args.backend != "both" else "fast",
                           cap=args.cap)

    elements = grp.ball(args.radius)
    meta = {"command": "vf-induce", "datum": datum.name or args.datum,
            "radius": args.radius, "seed": args.seed}
    report = Report(["lambda", "re", "im"], meta)
    for lam in elements:
        val = induce_to_vf(datum, coeff, lam, blocks)
        report.add(grp.format(lam), val.real, val.imag)
    gram = vf_gram(datum, coeff, elements, blocks)
    eig_min = float(np.linalg.eigvalsh((gram + gram.conj().T) / 2).min())
    report.meta["gram_min_eigenvalue"] = _fmt(eig_min)
    report.write(args.output)
    scale = max(1.0, float(np.abs(gram).max()))
    if eig_min < -1e-8 * scale:
        print("induced Gram matrix is not positive semidefinite", file=sys.stderr)
        return EXIT_MATH
    return EXIT_OK


def cmd_herz(args) -> int:
    space = _load_space(args.system)
    vec = fileio.load_vector(_resolve(args.vector), space)
    tol = args.tolerance if args.tolerance else 1e-9
    meta = {"command": "herz", "radius": args.radius, "seed": args.seed,
            "tolerance": _fmt(tol)}
    report = Report(["x", "N", "lhs", "rhs", "margin", "pass"], meta)
    words = list(ball(space.alphabet, args.radius, cap=args.cap))

    def one(w):
        n = len(w) + 1
        backend = args.backend if args.backend != "both" else "fast"
        return w, n, herz_check(vec, w, n, tol=tol, backend=backend)

    if args.threads > 1:
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            results = list(pool.map(one, words))
    else:
        results = [one(w) for w in words]
    failures = 0
    for w, n, hz in results:
        report.add(str(w), n, hz.lhs, hz.rhs, hz.margin, "pass" if hz.passed else "FAIL")
        failures += 0 if hz.passed else 1
    report.meta["failures"] = failures
    report.write(args.output)
    print(f"herz: {len(results) - failures}/{len(results)} pass")
    return EXIT_OK if failures == 0 else EXIT_MATH


def cmd_demo_no_hc(args) -> int:
    if args.uniform_rank:
        from .words import Alphabet

        alphabet = Alphabet.rank(args.uniform_rank)
        mu = uniform_measure(alphabet)
        source = f"uniform(rank {args.uniform_rank})"
    else:
        space = _load_space(args.system)
        vec = fileio.load_vector(_resolve(args.vector), space)
        nrm2 = inner(vec, vec).real
        if abs(nrm2 - 1.0) > 1e-9:
            raise ValidationError("demo vector must have unit norm")
        mu = spectral_measure(vec)
        alphabet = space.alphabet
        source = "spectral"
    w = Word.parse(alphabet, args.word)
    rows = no_harish_chandra_demo(mu, w, args.max_power)
    meta = {"command": "demo-no-hc", "measure": source, "word": str(w)}
    report = Report(["n", "word_length", "phi"], meta)
    decreasing = True
    prev = None
    for n, length, phi in rows:
        report.add(n, length, phi)
        if prev is not None and phi >= prev:
            decreasing = False
        if phi >= 1.0:
            decreasing = False
        prev = phi
    report.write(args.output)
    if not decreasing:
        print("decay demonstration failed: values not strictly below one and decreasing",
              file=sys.stderr)
        return EXIT_MATH
    return EXIT_OK


def cmd_selftest(args) -> int:
    """Compact seeded end-to-end checks over the shipped data."""
    from .system import spherical_system
    from .words import Alphabet

    checks = []
    rng = np.random.default_rng(args.seed)

    alphabet = Alphabet.rank(2)
    unscaled, _ = spherical_system(alphabet, scale=1.0)
    result = normalize(unscaled)
    checks.append(("normalize spherical radius 3", abs(result.spectral_radius - 3.0) <= 1e-9))
    checks.append(("normalize residual", result.residual <= 1e-9))

    space = _load_space("builtin:spherical2")
    f = fileio.load_vector(_resolve("builtin:seed-a"), space)
    a = Word.parse(alphabet, "a")
    val = coefficient(a, f, f, backend="fast")
    checks.append(("spherical coefficient 3^-1/2", abs(val - 3 ** -0.5) <= 1e-12))
    brute = coefficient(a, f, f, backend="brute")
    checks.append(("backend agreement", abs(val - brute) <= 1e-10))

    from .multrep import covariance_check

    worst = 0.0
    for _ in range(10):
        letters = [int(rng.integers(4))]
        for _ in range(2):
            c = int(rng.integers(4))
            if c != alphabet.inv[letters[-1]]:
                letters.append(c)
        x = Word(alphabet, letters)
        z = Word(alphabet, [int(rng.integers(4))])
        worst = max(worst, covariance_check(x, z, f))
    checks.append(("boundary covariance", worst <= 1e-10))

    hz = herz_check(f, a, 2)
    checks.append(("herz equality case", hz.passed and abs(hz.lhs - hz.rhs) <= 1e-12))

    failures = 0
    for name, ok in checks:
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
        failures += 0 if ok else 1
    return EXIT_OK if failures == 0 else EXIT_MATH


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mbrep",
                                     description="multiplicative boundary representations toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("normalize", help="scale a system to transfer radius one and solve the fixed point")
    p.add_argument("--input", required=True)
    _common_flags(p)
    p.set_defaults(fn=cmd_normalize)

    p = sub.add_parser("decompose", help="split a system with forms into irreducible components")
    p.add_argument("--input", required=True)
    _common_flags(p)
    p.set_defaults(fn=cmd_decompose)

    p = sub.add_parser("coefficients", help="matrix coefficients of a vector over a word list")
    p.add_argument("--system", required=True)
    p.add_argument("--vector", required=True)
    p.add_argument("--words", default="", help="comma-separated reduced words ('e' for identity)")
    _common_flags(p)
    p.set_defaults(fn=cmd_coefficients)

    p = sub.add_parser("induce", help="induce a subgroup system through a finite-quotient kernel")
    p.add_argument("--system", required=True, help="system over the subgroup generator alphabet")
    p.add_argument("--quotient", required=True)
    p.add_argument("--base-rank", type=int, default=2, help="rank of the ambient free group")
    p.add_argument("--base-system", default=None,
                   help="optional ambient system file fixing the ambient alphabet")
    p.add_argument("--trials", type=int, default=10, help="random checks of the intertwiner")
    _common_flags(p)
    p.set_defaults(fn=cmd_induce)

    p = sub.add_parser("vf-induce", help="matrix coefficients induced to a virtually free group")
    p.add_argument("--datum", default="psl2z", help="'psl2z' or a datum file")
    p.add_argument("--system", required=True, help="system over the free-basis alphabet")
    p.add_argument("--vector", required=True, help="block vector at the identity coset")
    p.add_argument("--radius", type=int, default=3)
    _common_flags(p)
    p.set_defaults(fn=cmd_vf_induce)

    p = sub.add_parser("herz", help="majorization report over a word ball")
    p.add_argument("--system", required=True)
    p.add_argument("--vector", required=True)
    p.add_argument("--radius", type=int, default=3)
    _common_flags(p)
    p.set_defaults(fn=cmd_herz)

    p = sub.add_parser("demo-no-hc", help="decay table showing the majorizing measure depends on the vector")
    p.add_argument("--word", required=True)
    p.add_argument("--max-power", type=int, default=6)
    p.add_argument("--system", default=None)
    p.add_argument("--vector", default=None)
    p.add_argument("--uniform-rank", type=int, default=None,
                   help="use the uniform measure on the rank-r boundary instead of a vector")
    _common_flags(p)
    p.set_defaults(fn=cmd_demo_no_hc)

    p = sub.add_parser("selftest", help="compact seeded end-to-end checks")
    _common_flags(p)
    p.set_defaults(fn=cmd_selftest)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except CapExceededError as err:
        print(f"resource cap: {err}", file=sys.stderr)
        return EXIT_CAP
    except (DegenerateSystemError, NormalizationError) as err:
        print(f"solver failure: {err}", file=sys.stderr)
        return EXIT_MATH
    except ValidationError as err:
        print(f"validation failure: {err}", file=sys.stderr)
        return EXIT_VALIDATION
    except FileNotFoundError as err:
        print(f"validation failure: {err}", file=sys.stderr)
        return EXIT_VALIDATION
    except MbrepError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_MATH


if __name__ == "__main__":
    sys.exit(main())
