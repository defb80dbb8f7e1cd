"""Quaternion matrix low-rank toolkit.

Core pieces: quaternion scalars and plane-stored matrices (:mod:`qcur.quat`),
SVD and pseudoinverse through the complex adjoint (:mod:`qcur.linalg`),
sampled CUR factorization with perturbation bounds (:mod:`qcur.cur`),
synthetic benchmarks (:mod:`qcur.bench`), iterative matrix completion
(:mod:`qcur.completion`), color-image helpers (:mod:`qcur.imaging`), and a
command-line front end (:mod:`qcur.cli`).
"""
from . import _threads  # noqa: F401  -- must run before numpy gets imported

from .errors import (
    DegenerateDistributionError,
    DegenerateSamplingError,
    FileFormatError,
    ParameterError,
    QcurError,
    SamplingError,
    ShapeError,
)
from .quat import (
    QMatrix,
    Quaternion,
    qmat_conj_transpose,
    qmat_frobenius_norm,
    qmat_matmul,
    read_qmat,
    write_qmat,
)
from .linalg import (
    ComplexAdjoint,
    QSVDResult,
    lowrank_truncate,
    numerical_rank,
    orthonormalize_columns,
    pseudoinverse,
    qsvd,
    spectral_norm,
    to_complex_adjoint,
)
from .cur import (
    CURFactors,
    SamplingPlan,
    PerturbationBounds,
    cur_reconstruct,
    default_sample_counts,
    draw_indices,
    length_distributions,
    make_plan,
    perturbation_bounds,
    plan_indices,
    qmcur,
    stabilized_reconstruct,
    uniform_distributions,
)
from .bench import (
    BenchRecord,
    SyntheticSpec,
    derive_seed,
    gaussian_noise,
    perturbation_experiment,
    random_lowrank,
    records_to_csv,
    scaling_experiment,
    write_records_csv,
)
from .completion import (
    CompletionConfig,
    CompletionResult,
    ObservationMask,
    complete,
    project_observed,
    random_mask,
)
from .imaging import (
    RgbImage,
    image_to_qmat,
    psnr,
    qmat_to_image,
    read_png,
    read_ppm,
    relative_error,
    ssim,
    write_png,
    write_ppm,
)

__version__ = "0.1.0"

__all__ = [
    "QMatrix",
    "Quaternion",
    "qmat_matmul",
    "qmat_conj_transpose",
    "qmat_frobenius_norm",
    "read_qmat",
    "write_qmat",
    "ComplexAdjoint",
    "QSVDResult",
    "to_complex_adjoint",
    "qsvd",
    "pseudoinverse",
    "spectral_norm",
    "numerical_rank",
    "lowrank_truncate",
    "orthonormalize_columns",
    "SamplingPlan",
    "CURFactors",
    "PerturbationBounds",
    "length_distributions",
    "uniform_distributions",
    "default_sample_counts",
    "make_plan",
    "draw_indices",
    "plan_indices",
    "qmcur",
    "cur_reconstruct",
    "stabilized_reconstruct",
    "perturbation_bounds",
    "SyntheticSpec",
    "BenchRecord",
    "random_lowrank",
    "gaussian_noise",
    "derive_seed",
    "perturbation_experiment",
    "scaling_experiment",
    "records_to_csv",
    "write_records_csv",
    "ObservationMask",
    "CompletionConfig",
    "CompletionResult",
    "random_mask",
    "project_observed",
    "complete",
    "RgbImage",
    "image_to_qmat",
    "qmat_to_image",
    "psnr",
    "ssim",
    "relative_error",
    "read_png",
    "write_png",
    "read_ppm",
    "write_ppm",
    "QcurError",
    "ShapeError",
    "ParameterError",
    "FileFormatError",
    "DegenerateDistributionError",
    "SamplingError",
    "DegenerateSamplingError",
    "__version__",
]
