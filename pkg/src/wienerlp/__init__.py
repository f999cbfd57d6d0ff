"""Positive definite trigonometric polynomials on the torus: exact spectra,
certified L^p quadrature over symmetric sets, and the constructions showing
that local L^p control of a positive definite function fails to propagate
globally when p is not an even integer.
"""
from .constructions import (AssemblyError, BuilderOptions, GapSeries, SignSearchError,
                            gap_series, highp_concentrator, lowp_concentrator, ms_pair,
                            riesz_pair, shapiro_counterexample, sign_search)
from .experiments import (ExperimentReport, demo_diophantine, demo_majorant, demo_signs,
                          demo_strong_concentration, demo_wiener_failure, verify_shapiro)
from .norms import (NormResult, QuadratureOptions, concentration_ratio, even_exact,
                    hq_estimate, lp_integral, lp_integrals, poisson_regularize)
from .spectrum import (TrigPoly, classify, dilate, dirichlet, filter_multiples, make_poly,
                       modulate, multiply, read_poly, translate, write_poly)
from .torus import (TORUS, SymmetricSet, complement, diophantine_set, make_set, parse_set,
                    symmetric_interval)

__version__ = "0.1.0"
