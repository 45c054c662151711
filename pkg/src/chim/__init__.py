"""Multipath fading channel toolkit.

Simulates tapped-delay-line fading channels as time-frequency grids,
stores them as two-plane channel-image datasets (.chim files), ingests
measured channel-state CSV captures, and evaluates any such dataset with
fading statistics: LCR, AFD, mean autocorrelation and the cepstral
distance measure.
"""
from .dataset import (
    Dataset,
    atomic_write_bytes,
    denormalize_dataset,
    filter_by_label,
    import_csi_csv,
    normalize_dataset,
    read_dataset,
    split_dataset,
    write_dataset,
)
from .errors import (
    ChimError,
    DatasetCorruptionError,
    DatasetFormatError,
    DatasetVersionError,
    EmptyDatasetError,
    ProfileError,
)
from .image import (
    ChannelImage,
    ChannelLabel,
    NormalizationSpec,
    apply_normalization,
    fit_normalization,
    grid_to_image,
    image_to_grid,
    invert_normalization,
)
from .metrics import (
    AutocorrMean,
    CdmMatrix,
    CepstrumVector,
    LevelCurve,
    afd,
    autocorr,
    biased_autocorr,
    cdm,
    cdm_matrix,
    cepstrum,
    dataset_envelopes,
    grid_to_freqconcat_sequence,
    grid_to_sequence,
    grid_to_time_sequence,
    grid_to_timeconcat_sequence,
    lcr,
    mean_autocorr,
    time_variation,
)
from .profiles import TapProfile, builtin_profile, load_profile, single_tap_profile
from .simulate import (
    FadingProcess,
    PathComponent,
    PathSet,
    SimConfig,
    complex_gain,
    frequency_response,
    generate_dataset,
    generate_grid,
    max_doppler,
    sample_paths,
    subcarrier_frequencies,
    substream,
)

__version__ = "0.1.0"
