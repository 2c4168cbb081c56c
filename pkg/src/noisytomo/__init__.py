"""Quantum state tomography through noisy measurement channels.

Simulates polyhedral qubit measurement protocols subjected to Kraus
decoherence channels, reconstructs the pre-decoherence pure state by
maximum likelihood over the induced fuzzy operators, and quantifies the
achievable fidelity through the complete information matrix and its
generalized chi-squared loss distribution.
"""

from .channels import (QuantumChannel, amplitude_relaxation, bit_flip,
                       closed_form_operator, fold_channel, identity_channel,
                       make_channel, phase_flip, pure_dephasing,
                       tensor_channel)
from .core import (bloch_to_projector, bloch_to_state, fidelity,
                   realify_operator, realify_state, tensor)
from .estimation import (CountVector, ReconstructionResult, StateTomographyMLE,
                         log_likelihood, reconstruct, sample_counts)
from .information import (BlochMap, InformationMatrix, LossSpectrum,
                          bloch_loss_map, chi2_statistic, information_matrix,
                          loss_moments, loss_spectrum,
                          sample_loss_distribution, scaled_loss, state_loss)
from .protocols import (EffectiveMeasurement, Protocol, build_protocol,
                        event_probabilities, measurement_operators,
                        rotate_protocol, tensor_protocol)

__version__ = "0.1.0"
