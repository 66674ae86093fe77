"""Upper bounds on the ML decoding error probability of general codes over AWGN.

The package covers four steps of a performance study:

* describing a code as a trellis (:mod:`mlbounds.trellis`),
* computing its Euclidean and triangle distance spectra (:mod:`mlbounds.spectrum`),
* evaluating the union, sphere, tangential and tangential-sphere bounds
  (:mod:`mlbounds.bounds`),
* checking the bounds against Monte-Carlo ML decoding (:mod:`mlbounds.simulate`).
"""

from .trellis import (
    Branch,
    Codeword,
    GuardError,
    Stage,
    Trellis,
    TrellisError,
    average_energy,
    bpsk_linear_code_trellis,
    convolutional_trellis,
    enumerate_codewords,
    enumerate_paths,
    read_trellis,
    trivial_trellis,
    validate,
    write_trellis,
)
from .spectrum import (
    DistanceSpectrum,
    SpectrumError,
    TriangleSpectrum,
    binary_spectra_from_weights,
    brute_force_pair_spectrum,
    euclidean_spectrum,
    read_spectra,
    triangle_spectrum,
    write_spectrum,
)
from .numerics import cap_ratio, q_function, solve_threshold
from .bounds import (
    BoundResult,
    ChannelParams,
    QuadratureConfig,
    binary_sphere_bound,
    binary_tangential_bound,
    binary_tsb,
    sphere_bound_general,
    tangential_bound_general,
    tangential_sphere_bound_general,
    union_bound,
)
from .simulate import FerEstimate, monte_carlo_fer, viterbi_decode

__version__ = "0.1.0"
