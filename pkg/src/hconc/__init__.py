"""Exact concentration-of-measure toolkit for vector-valued functions on the Hamming cube."""

from .cube import (CubeFunction, FourierCoefficients, discrete_derivative,
                   evaluate_extension, expectation, from_coefficients,
                   from_values, to_coefficients)
from .functionals import (GAMMA, P_AUTO, P_EXACT, WEAK, GradientMode, beta,
                          entropy_sq, exp_moment, gradient_sq, m_gradient,
                          moment, moment_log_derivative, orlicz_norm,
                          outward_chord_slope, sigma_partial_sums,
                          sup_gradient_sq)
from .spaces import (SpaceDescriptor, cotype_of, euclidean, norm, operator,
                     scalar, schatten, singular_values)

__version__ = "0.1.0"
