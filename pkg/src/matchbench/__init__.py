"""Matchgate benchmarking: random matchgate circuits, free-fermion simulation,
Pfaffian correlation functions, decay fitting and fidelity extraction."""

from .compiler import Gate, GateCircuit, compile_element, induced_rotation
from .correlation import alpha, alpha_all, alpha_even, alpha_odd, build_qx
from .covariance import CovarianceState, run_covariance
from .dense import (BackendError, DenseLimitError, favg_exact, lambda_exact, lambdas_exact,
                    projector_superop, run_dense)
from .fitting import (DecayEstimate, FidelityReport, FitError, extract_fidelity, favg_from_lambdas,
                      fit_decay)
from .linalg import (GivensFactorization, OrthogonalElement, givens_decompose, haar_sample,
                     minor_sum_coefficients, pfaffian)
from .majorana import MajoranaLabel, PauliString, majorana_to_pauli, normalizations, spam_matrix
from .moments import moment_closed_form, moment_exact, variance_probe
from .noise import DenseChannel, GateDependent, GaussianB, NoNoise, depolarizing, noise_from_json
from .protocol import (Aggregator, RoundPlan, ShotBatch, SpamNoise, aggregate, iter_protocol,
                       run_protocol, simplex_design)

__version__ = "0.1.0"
