"""
Problem Service - Closed-form oracle for the 1-D Helmholtz problem.
Solves u'' + tau^2 u = F on [0, 2pi] by undetermined coefficients per frequency.
"""
import logging
import math

import numpy as np

from datamanager.data_models import ClosedFormSolution, HelmholtzProblem, TrigPolynomial
from exceptions import ValidationError

logger = logging.getLogger(__name__)

# Frequencies closer than this to tau are treated as resonant
RESONANCE_TOL = 1e-12


class ProblemService:
    """Service class for Helmholtz problems and their exact solutions"""

    def exact_solution(self, problem):
        """
        Solve the boundary-value problem in closed form.

        Non-resonant terms get amplitude a_k/(tau^2-k^2); a term with k = tau
        produces x cos / x sin secular contributions. The homogeneous part then
        fixes u(0)=alpha and u'(0)=beta.

        :param problem: HelmholtzProblem
        :return: ClosedFormSolution
        """
        if not isinstance(problem, HelmholtzProblem):
            raise ValidationError('problem', 'Expected a HelmholtzProblem')

        tau = problem.tau
        particular = []
        secular = []
        for k, a_k, b_k in problem.driving.terms:
            if abs(k - tau) < RESONANCE_TOL:
                # a cos(tau x) -> a/(2tau) x sin(tau x); b sin(tau x) -> -b/(2tau) x cos(tau x)
                secular.append((k, -b_k / (2.0 * tau), a_k / (2.0 * tau)))
            else:
                denominator = tau * tau - k * k
                particular.append((k, a_k / denominator, b_k / denominator))

        particular = TrigPolynomial(tuple(particular))
        secular = tuple(secular)

        up0 = sum(a for _, a, _ in particular.terms)
        dup0 = sum(k * b for k, _, b in particular.terms)
        # (x cos kx)' = 1 at x=0; (x sin kx)' = 0 at x=0
        dup0 += sum(x_cos for _, x_cos, _ in secular)

        c1 = problem.alpha - up0
        c2 = (problem.beta - dup0) / tau

        logger.debug("Exact solution for %s: c1=%r c2=%r, %d resonant terms",
                     problem.name, c1, c2, len(secular))
        return ClosedFormSolution(tau=tau, c1=c1, c2=c2,
                                  particular=particular, secular=secular)

    def eval_exact(self, solution, x, order=0):
        """
        Evaluate the closed form or one of its first two derivatives.

        :param solution: ClosedFormSolution
        :param x: Scalar or array of points
        :param order: Derivative order 0, 1 or 2
        :return: Float for scalar x, array otherwise
        """
        if order not in (0, 1, 2):
            raise ValidationError('order', f"Derivative order must be 0, 1 or 2, got {order}")

        scalar = np.ndim(x) == 0
        x = np.asarray(x, dtype=float)

        tau = solution.tau
        value = (solution.c1 * _cos_derivative(tau, x, order)
                 + solution.c2 * _sin_derivative(tau, x, order))
        for k, a_k, b_k in solution.particular.terms:
            value = value + a_k * _cos_derivative(k, x, order) + b_k * _sin_derivative(k, x, order)
        for k, x_cos, x_sin in solution.secular:
            value = value + x_cos * _x_cos_derivative(k, x, order) + x_sin * _x_sin_derivative(k, x, order)

        return float(value) if scalar else value

    def eval_driving(self, driving, x):
        """
        Evaluate a trigonometric polynomial pointwise.

        :param driving: TrigPolynomial
        :param x: Scalar or array of points
        :return: Float for scalar x, array otherwise
        """
        scalar = np.ndim(x) == 0
        x = np.asarray(x, dtype=float)
        value = np.zeros_like(x)
        for k, a_k, b_k in driving.terms:
            value = value + a_k * np.cos(k * x) + b_k * np.sin(k * x)
        return float(value) if scalar else value

    def residual(self, problem, solution, x):
        """
        Pointwise residual u'' + tau^2 u - F.

        :param problem: HelmholtzProblem
        :param solution: ClosedFormSolution
        :param x: Array of points
        :return: Array of residuals
        """
        u = self.eval_exact(solution, x, order=0)
        d2u = self.eval_exact(solution, x, order=2)
        return d2u + problem.tau ** 2 * u - self.eval_driving(problem.driving, x)


def _cos_derivative(k, x, order):
    return k ** order * np.cos(k * x + order * math.pi / 2.0)


def _sin_derivative(k, x, order):
    return k ** order * np.sin(k * x + order * math.pi / 2.0)


def _x_cos_derivative(k, x, order):
    if order == 0:
        return x * np.cos(k * x)
    if order == 1:
        return np.cos(k * x) - k * x * np.sin(k * x)
    return -2.0 * k * np.sin(k * x) - k * k * x * np.cos(k * x)


def _x_sin_derivative(k, x, order):
    if order == 0:
        return x * np.sin(k * x)
    if order == 1:
        return np.sin(k * x) + k * x * np.cos(k * x)
    return 2.0 * k * np.cos(k * x) - k * k * x * np.sin(k * x)
