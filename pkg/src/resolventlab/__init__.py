"""Numerical laboratory for resolvent statistics of non-Hermitian random matrices.

The package samples resolvent diagonal elements, Stieltjes-transform
fluctuations and eigenvector overlaps for Ginibre-type ensembles, evaluates
the exact finite-N and limiting laws they follow, and verifies the two
against each other with heavy-tail-aware statistics.

Layout
------
``special_fns``   log-space special functions (incomplete gamma, erfc)
``densities``     exact and limiting probability laws, tail amplitudes, samplers
``ensembles``     random-matrix generators (Ginibre, elliptic, Haar, products, GUE)
``resolvent``     resolvent entries, Stieltjes traces, regime rescalings
``overlaps``      eigenvector self-overlaps and conditional overlap statistics
``stats``         KS/Kuiper distances, power-law tail fits, symmetry checks
``harness``       experiment configs, the runner, report emission
``cli``           command-line front end
"""

__version__ = "0.1.0"

__all__ = [
    "special_fns",
    "densities",
    "ensembles",
    "resolvent",
    "overlaps",
    "stats",
    "harness",
    "cli",
]
