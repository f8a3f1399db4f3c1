"""Exact permanents: Ryser's formula against the definition and the subset expansion.

The permanent of a Hermitian matrix with spectrum in [1, 2] is real and at
least 1. Ryser's Gray-code formula is the workhorse; the permutation sum and
the expansion ``per(I + B) = sum_J per(B_J)`` serve as cross-checks.
"""

import math

import numpy as np

from permlc import permanent_definition, permanent_ryser, random_instance, split_identity, subset_expansion


def main():
    print("all-ones matrices: per(J_n) = n!")
    for n in range(1, 9):
        print(f"  n={n}  ryser={permanent_ryser(np.ones((n, n))).real:.1f}  n!={math.factorial(n)}")

    print("\nrandom admissible matrices A = I + B")
    for n in (2, 4, 6):
        A = random_instance(n, spread=1.0, seed=n)
        ryser = permanent_ryser(A)
        print(
            f"  n={n}  ryser={ryser.real:.12f}  imag={ryser.imag:.1e}"
            f"  definition={permanent_definition(A).real:.12f}"
            f"  subsets={subset_expansion(split_identity(A)).real:.12f}"
        )


if __name__ == "__main__":
    main()
