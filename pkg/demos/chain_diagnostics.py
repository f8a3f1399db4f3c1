"""Effective sample size and split R-hat on synthetic traces.

Independent draws have an ESS close to the number of draws. An AR(1) chain
with coefficient ``phi`` keeps roughly a fraction ``(1 - phi) / (1 + phi)``.
Chains stuck at different levels push R-hat well above 1.
"""

import numpy as np

from permlc import diagnostics


def ar1(phi, chains, draws, rng):
    x = np.zeros((chains, draws))
    for t in range(1, draws):
        x[:, t] = phi * x[:, t - 1] + rng.standard_normal(chains)
    return x


def main():
    rng = np.random.default_rng(0)
    cases = {
        "iid": rng.standard_normal((4, 2000)),
        "ar1 phi=0.9": ar1(0.9, 4, 2000, rng),
        "shifted chains": rng.standard_normal((4, 2000)) + np.array([[0.0], [0.0], [2.0], [2.0]]),
    }
    for name, traces in cases.items():
        d = diagnostics(traces)
        print(f"{name:<15} ess={d.effective_sample_size:8.1f}  split_rhat={d.split_rhat:.3f}")


if __name__ == "__main__":
    main()
