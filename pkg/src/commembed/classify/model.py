"""L2-regularized logistic regression trained with L-BFGS.

Objective: mean logistic loss + 0.5 * l2_strength * ||w||^2, intercept
unpenalized, optimized to gradient-norm tolerance 1e-4. The mean (not sum)
makes the fit invariant to duplicating the training set at fixed
regularization strength. Because the loss is a mean, a strength around
1e-4 corresponds to the common sum-loss formulation with a unit penalty
at corpus sizes in the tens of thousands; 1.0 would flatten sparse text
features entirely.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.optimize import minimize
from scipy.special import expit

log = logging.getLogger(__name__)


@dataclass
class LogisticModel:
    weights: np.ndarray
    intercept: float
    converged: bool = True

    def decision_function(self, X) -> np.ndarray:
        return np.asarray(X @ self.weights).ravel() + self.intercept

    def predict_deg(self, X) -> np.ndarray:
        """True where the comment is classified derogatory (score >= 0)."""
        return self.decision_function(X) >= 0.0

    def predict_proba_deg(self, X) -> np.ndarray:
        return expit(self.decision_function(X))


def train_model(
    X,
    y_deg: np.ndarray,
    l2_strength: float = 1e-4,
    tol: float = 1e-4,
    max_iter: int = 1000,
) -> LogisticModel:
    """Fit on a (sparse) feature matrix and boolean derogatory labels."""
    y_deg = np.asarray(y_deg, dtype=bool)
    n, d = X.shape
    if n == 0:
        raise ValueError("empty training set")
    if y_deg.all() or not y_deg.any():
        raise ValueError("training data contains a single class; cannot fit")
    if l2_strength < 0:
        raise ValueError("l2_strength must be >= 0")

    y = np.where(y_deg, 1.0, -1.0)
    Xs = X.tocsr() if sp.issparse(X) else np.asarray(X, dtype=np.float64)

    def objective(theta: np.ndarray):
        w = theta[:d]
        b = theta[d]
        z = np.asarray(Xs @ w).ravel() + b
        margins = -y * z
        loss = float(np.mean(np.logaddexp(0.0, margins)))
        loss += 0.5 * l2_strength * float(w @ w)
        # d/dz log(1 + exp(-y z)) = -y * sigmoid(-y z)
        dz = -y * expit(margins) / n
        grad_w = np.asarray(Xs.T @ dz).ravel() + l2_strength * w
        grad_b = float(np.sum(dz))
        return loss, np.concatenate([grad_w, [grad_b]])

    result = minimize(
        objective,
        np.zeros(d + 1),
        jac=True,
        method="L-BFGS-B",
        options={"gtol": tol, "maxiter": max_iter},
    )
    if not result.success:
        log.warning("logistic fit did not fully converge: %s", result.message)
    return LogisticModel(result.x[:d].copy(), float(result.x[d]), bool(result.success))
