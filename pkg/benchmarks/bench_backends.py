"""Compare the brute-sum kernels (numba vs numpy fallback) and the
accelerated coefficient backend on a growing word-length sweep.

Run twice to see both kernel paths:

    python3 benchmarks/bench_backends.py
    MBREP_DISABLE_NUMBA=1 python3 benchmarks/bench_backends.py
"""

import time

import numpy as np

from mbrep import _kernels
from mbrep.multrep import MultVector, RepSpace, coefficient
from mbrep.system import spherical_system
from mbrep.words import Alphabet, Word


def main() -> None:
    alphabet = Alphabet.rank(2)
    system, forms = spherical_system(alphabet)
    space = RepSpace(system, forms)
    f = MultVector.seed(space, {Word.parse(alphabet, "a"): [1.0]})

    _kernels.warmup()
    print(f"kernel backend: {_kernels.backend_name()}")
    print(f"{'|x|':>4} {'brute (s)':>12} {'fast (s)':>12} {'|diff|':>10}")
    word = ""
    letters = "ab"
    for k in range(2, 13):
        word = (letters * 7)[:k]
        x = Word.parse(alphabet, word)
        t0 = time.perf_counter()
        brute = coefficient(x, f, f, backend="brute")
        t1 = time.perf_counter()
        fast = coefficient(x, f, f, backend="fast")
        t2 = time.perf_counter()
        print(f"{k:>4} {t1 - t0:>12.6f} {t2 - t1:>12.6f} {abs(brute - fast):>10.2e}")


if __name__ == "__main__":
    main()
