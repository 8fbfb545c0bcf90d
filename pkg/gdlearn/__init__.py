from gdlearn import errors, model
from gdlearn._baselines import (
    BaselineConfig,
    ksvd_pk_learn,
    ksvd_pk_sweep,
    mod_dictionary_update,
    mod_learn,
    overcomplete_dct_dictionary,
)
from gdlearn._coding import OmpConfig, exact_sparse_oracle, omp, omp_path
from gdlearn._data import SyntheticSpec, apply_noise, gen_synthetic
from gdlearn._denoiser import DenoiseConfig, DenoiseMethod, Denoiser
from gdlearn._gdl import (
    GdlConfig,
    GroundTruth,
    column_stage,
    gdl_init,
    gdl_learn,
    objective,
    row_stage,
)
from gdlearn._io import (
    load_coefficients_csv,
    load_matrix_csv,
    load_pgm,
    store_coefficients_csv,
    store_matrix_csv,
    store_pgm,
)
from gdlearn._metrics import (
    atom_recovery_distance,
    atom_usage_map,
    dictionary_recovery_rate,
    psnr,
    representation_error,
)
from gdlearn._patches import extract_patches, reconstruct_from_patches
from gdlearn._random import seeded_rng
from gdlearn._rank1 import (
    SparsePcaConfig,
    direction_to_rank1,
    sparse_pca_oracle,
    sparse_pca_rank1,
    sparse_rank1_update,
)

__all__ = [
    "BaselineConfig",
    "DenoiseConfig",
    "DenoiseMethod",
    "Denoiser",
    "GdlConfig",
    "GroundTruth",
    "OmpConfig",
    "SparsePcaConfig",
    "SyntheticSpec",
    "apply_noise",
    "atom_recovery_distance",
    "atom_usage_map",
    "column_stage",
    "dictionary_recovery_rate",
    "direction_to_rank1",
    "errors",
    "exact_sparse_oracle",
    "extract_patches",
    "gdl_init",
    "gdl_learn",
    "gen_synthetic",
    "ksvd_pk_learn",
    "ksvd_pk_sweep",
    "load_coefficients_csv",
    "load_matrix_csv",
    "load_pgm",
    "mod_dictionary_update",
    "mod_learn",
    "model",
    "objective",
    "omp",
    "omp_path",
    "overcomplete_dct_dictionary",
    "psnr",
    "reconstruct_from_patches",
    "representation_error",
    "row_stage",
    "seeded_rng",
    "sparse_pca_oracle",
    "sparse_pca_rank1",
    "sparse_rank1_update",
    "store_coefficients_csv",
    "store_matrix_csv",
    "store_pgm",
]
