"""scikit-learn style wrapper around the relational pipeline.

``fit`` takes a bipartite Hamiltonian and selects the global eigenstate,
``transform`` maps parameter values to projected conditional states and
``predict`` integrates the emergent TDSE from the first requested point::

    est = RelationalClock(chi0=[1, 1]).fit(paper_example_spec())
    phi = est.transform(np.linspace(0, np.pi, 101))
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_grid, check_vector
from .dynamics import SystemTrajectory, compare, integrate_tdse
from .model import HamiltonianSpec, assemble_global
from .relational import build_clock_trajectory, conditional_states, make_potential_provider
from .spectral import eigenspaces, make_eigenstate, select_state


class RelationalClock(TransformerMixin, BaseEstimator):
    """Conditional system dynamics read off a global eigenstate.

    Parameters
    ----------
    chi0 : array-like of complex, optional
        Initial clock state.  Defaults to the uniform superposition.
    energy_index : int
        Which eigenspace (ascending energy) holds the global state.
    coefficients : array-like of complex, optional
        Combination of the eigenspace basis; defaults to the first basis vector.
    psi : array-like of complex, optional
        Explicit global state.  Overrides ``energy_index``/``coefficients``;
        its energy is taken from the Rayleigh quotient.
    degeneracy_tol : float, optional
        Eigenvalue clustering threshold.
    threads : int
        Worker threads for grid evaluation.
    """

    def __init__(self, chi0=None, energy_index=0, coefficients=None, psi=None, degeneracy_tol=None, threads=1):
        self.chi0 = chi0
        self.energy_index = energy_index
        self.coefficients = coefficients
        self.psi = psi
        self.degeneracy_tol = degeneracy_tol
        self.threads = threads

    def fit(self, X, y=None):
        spec = X if isinstance(X, HamiltonianSpec) else HamiltonianSpec(*X)
        h = assemble_global(spec)
        self.eigenspaces_ = eigenspaces(h, self.degeneracy_tol)
        if self.psi is not None:
            psi = check_vector(self.psi, "psi", spec.dim)
            energy = float(np.vdot(psi, h @ psi).real / np.vdot(psi, psi).real)
            self.state_ = make_eigenstate(h, psi, energy)
        else:
            self.state_ = select_state(h, self.eigenspaces_[self.energy_index], self.coefficients)
        if self.chi0 is None:
            self.chi0_ = np.ones(spec.d_clock, dtype=complex) / np.sqrt(spec.d_clock)
        else:
            self.chi0_ = check_vector(self.chi0, "chi0", spec.d_clock)
        self.spec_ = spec
        self.energy_ = self.state_.energy
        self.n_features_in_ = spec.d_system
        return self

    def _trajectory(self, X):
        check_is_fitted(self, "state_")
        grid = check_grid(np.ravel(X))
        return build_clock_trajectory(self.state_.psi, self.chi0_, self.spec_.h_clock, self.energy_,
                                      self.spec_.v_interaction, grid, threads=self.threads)

    def transform(self, X):
        """Projected conditional states, shape ``(n_points, d_S)``.

        The accumulated phase starts at the first point of ``X``.
        """
        traj, _ = self._trajectory(X)
        return conditional_states(self.state_.psi, traj)

    def effective_potential(self, X):
        """Stack of Hermitian ``V_S`` matrices on ``X``."""
        _, samples = self._trajectory(X)
        return np.array([s.v_s for s in samples])

    def predict(self, X):
        """Integrate the emergent TDSE on ``X`` from the projection at ``X[0]``."""
        check_is_fitted(self, "state_")
        grid = check_grid(np.ravel(X))
        phi0 = self.transform(grid[:1])[0]
        provider = make_potential_provider(self.state_.psi, self.chi0_, self.spec_.h_clock, self.energy_,
                                           self.spec_.v_interaction)
        return integrate_tdse(self.spec_.h_system, provider, phi0, grid).states

    def score(self, X, y=None):
        """``1 -`` worst infidelity between integrated and projected states (1 is perfect)."""
        grid = check_grid(np.ravel(X))
        proj = SystemTrajectory(grid, self.transform(grid), "projected")
        integ = SystemTrajectory(grid, self.predict(grid), "integrated")
        return 1.0 - compare(integ, proj).max_infidelity
