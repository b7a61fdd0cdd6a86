"""Classical capacity of bosonic additive-noise channels with Markovian Gaussian noise."""

from .channel import (
    GaussianState,
    NoiseCovariance,
    apply_additive_noise,
    decouple_check,
    dft_unravel,
    encode_orthogonal,
    monte_carlo_channel,
    stationary_noise_cov,
)
from .errors import (
    BlockMismatch,
    DimensionMismatch,
    DomainError,
    MemchanError,
    NotOrthogonal,
    QuadratureError,
    SingularRegion,
    ZeroVariance,
)
from .noise_process import (
    GaussianNoiseDist,
    MarkovParams,
    NotForgetful,
    evolve,
    forgetfulness_horizon,
    l1_distance,
    sample_path,
    transition_step,
)
from .spectral import (
    NoiseSpectrum,
    SymTridiagonal,
    build_M,
    eigenvalues,
    eigenvectors,
    noise_spectrum,
    symbol_average,
    symbol_m,
    symbol_sigma,
    szego_deviation,
)
from .waterfill import (
    ChannelParams,
    WaterFillSolution,
    capacity_bounds,
    capacity_discrete,
    capacity_memory,
    g,
    sweep,
    waterfill_continuous,
    waterfill_discrete,
)

__version__ = "0.1.0"
