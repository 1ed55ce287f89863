"""All-at-once Bayesian inversion for linear PDE models.

Subpackages by layer: :mod:`linalg` (dense eigen/CG kernels),
:mod:`laplacian` and :mod:`fem` (the two discretisations of the Dirichlet
Laplacian), :mod:`aao_is` and :mod:`aao_bh` (all-at-once operators of the
inverse source and backwards heat problems), :mod:`priors`, :mod:`bayes`
and the experiment driver :mod:`cli`.
"""

__version__ = "0.1.0"
