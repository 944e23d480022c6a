"""Baseband simulation and digital cancellation of passive intermodulation
in inter-band carrier-aggregation FDD transceivers."""
__version__ = "0.1.0"

from ._accel import BACKEND
from .basis import BasisTerm, DataMatrix, ModelKind, ModelSpec, build_data_matrix, enumerate_basis
from .canceller import StreamingState, cancel_block, cancel_streaming
from .estimator import CoefficientVector, EstimatorConfig, fit_adaptive, fit_block_ls
from .frontend import FrontEndModel, PimKernel, TxChainModel, apply_tx_chain, generate_pim, simulate_rx
from .metrics import CancellationReport, PsdEstimate, band_power_db, make_report, welch_psd
from .signal import CarrierConfig, IqSequence, generate_cc, mean_power_db, scale_to_power

__all__ = [
    "BACKEND", "BasisTerm", "DataMatrix", "ModelKind", "ModelSpec", "build_data_matrix",
    "enumerate_basis", "StreamingState", "cancel_block", "cancel_streaming", "CoefficientVector",
    "EstimatorConfig", "fit_adaptive", "fit_block_ls", "FrontEndModel", "PimKernel", "TxChainModel",
    "apply_tx_chain", "generate_pim", "simulate_rx", "CancellationReport", "PsdEstimate",
    "band_power_db", "make_report", "welch_psd", "CarrierConfig", "IqSequence", "generate_cc",
    "mean_power_db", "scale_to_power",
]
