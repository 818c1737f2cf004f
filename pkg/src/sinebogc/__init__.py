"""Toeplitz and Fredholm determinants, Hankel-operator formulas and sine-process
statistics, with numerical verification tools."""

from .errors import HypothesisError, NumericalFailure, SinebogcError, ValidationError
from .fredholm import DetResult, OperatorMatrix, det_finite, nystrom_det, sine_mult_det
from .hankel import (HalfLineQuad, bogc_rhs, continual_det, exterior_trace_continual, exterior_trace_discrete,
                     hankel_continual_product, hankel_discrete)
from .sineproc import (mc_linear_variance, mc_mult_expectation, mean_S, sample, theorem_rhs, lemma_rhs,
                       variance_S, variance_spectral)
from .symbols import (Composite, SmoothBump, SpectralData, TrigPolynomial, build_N, build_h, fourier_line,
                      fourier_torus, scale_to_torus, symbol_from_json)
from .toeplitz import dirichlet_det, toeplitz_det

__version__ = "0.1.0"
