"""Echo state networks, delay reservoirs and reservoir-based sensing."""

from ._core import (
    EchoStateNetwork,
    Error,
    InvalidArgument,
    IoError,
    NumericError,
    OutOfRangeError,
    fit_decay,
    generate_mask,
    infer_concentration,
    nrmse,
    packet_spectrum,
    parity_targets,
    quality_of_sensing,
    random_bits,
    run_delay_reservoir,
    run_experiment,
    simulate,
    spectral_radius,
    train_pinv,
    train_ridge,
    virtual_neuron_count,
)

__version__ = "0.1.0"

__all__ = [
    "EchoStateNetwork",
    "Error",
    "InvalidArgument",
    "IoError",
    "NumericError",
    "OutOfRangeError",
    "fit_decay",
    "generate_mask",
    "infer_concentration",
    "nrmse",
    "packet_spectrum",
    "parity_targets",
    "quality_of_sensing",
    "random_bits",
    "run_delay_reservoir",
    "run_experiment",
    "simulate",
    "spectral_radius",
    "train_pinv",
    "train_ridge",
    "virtual_neuron_count",
]
