"""The density behind the integral and why it is log-concave.

For ``A = I + L L*`` the density
``f(z) = pi^-n exp(-|z|^2) prod_j (1 + |l_j(z)|^2)`` integrates to ``per A``.
Writing ``-|z|^2 + sum_j log(1 + |l_j|^2)`` as ``-q(z) + sum_j h(|l_j|^2)``
with ``h(t) = log(1 + t) - t`` shows log-concavity once ``q`` is positive
semidefinite, which holds exactly when the spectrum of ``A`` lies in [1, 2].
"""

import numpy as np

from permlc import build_density, check_logconcavity, check_q_psd, random_instance
from permlc.density import top_direction
from permlc.errors import SpectrumOutOfRange


def main():
    for n in (2, 5, 8):
        D = build_density(random_instance(n, spread=1.0, seed=n))
        print(
            f"n={n}  lambda_min(I - C)={check_q_psd(D):+.4f}"
            f"  violations(random)={check_logconcavity(D, trials=10_000, seed=1)}"
            f"  violations(top direction)={check_logconcavity(D, trials=10_000, seed=2, direction=top_direction(D))}"
        )

    print("\nstretching the spectrum past 2 breaks the construction:")
    try:
        build_density(np.diag([2.5, 1.0]))
    except SpectrumOutOfRange as err:
        print(f"  {type(err).__name__}: {err}")


if __name__ == "__main__":
    main()
