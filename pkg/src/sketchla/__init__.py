"""sketchla: sparse subspace embeddings and sketch-and-solve linear algebra.

Seed-defined sparse sketches (CountSketch-style and the OSNAP family)
applied in time proportional to input sparsity, the classic sketched
solvers built on them (least squares, leverage scores, low-rank
approximation), and a Monte Carlo lab that verifies every quantitative
guarantee against exact dense oracles.
"""

from .dense import (
    QRResult,
    SVDResult,
    invert_upper_triangular,
    qr,
    rank_k_error,
    singular_values,
    solve_least_squares,
    svd,
    truncate_rank_k,
)
from .estimators import (
    ApproxLeverageScores,
    SketchedLinearRegression,
    SketchedTruncatedSVD,
    SubspaceEmbedding,
)
from .exceptions import (
    MatrixMarketError,
    NumericalError,
    ParameterError,
    RankDeficiencyError,
    SingularTriangularError,
)
from .hashing import KWiseHash, gaussians, mix, mix64, rademacher, uniform01
from .matio import (
    canonicalize,
    format_matrix_market,
    frobenius_norm,
    matmul,
    read_matrix_market,
    write_matrix_market,
)
from .sketch import (
    KIND_OSNAP_BLOCK,
    KIND_OSNAP_GLOBAL,
    KIND_TZ,
    KINDS,
    Sketch,
    SketchSpec,
    SketchState,
    build_sketch,
    recommend_params,
    recommended_independence,
    spec_for_subspace,
    with_seed,
)
from .solvers import (
    LeverageResult,
    LowRankResult,
    RegressionResult,
    leverage_scores,
    low_rank,
    sketched_lstsq,
)
from .verify import (
    VerificationReport,
    embedding_success_rate,
    frobenius_moment_check,
    gaussian_matrix,
    hash_independence_exhaustive,
    matrix_product_error_check,
    nnz_scaling_benchmark,
    random_orthonormal,
)

__version__ = "0.1.0"

__all__ = [
    "ApproxLeverageScores",
    "KIND_OSNAP_BLOCK",
    "KIND_OSNAP_GLOBAL",
    "KIND_TZ",
    "KINDS",
    "KWiseHash",
    "LeverageResult",
    "LowRankResult",
    "MatrixMarketError",
    "NumericalError",
    "ParameterError",
    "QRResult",
    "RankDeficiencyError",
    "RegressionResult",
    "SingularTriangularError",
    "Sketch",
    "SketchSpec",
    "SketchState",
    "SketchedLinearRegression",
    "SketchedTruncatedSVD",
    "SubspaceEmbedding",
    "SVDResult",
    "VerificationReport",
    "build_sketch",
    "canonicalize",
    "embedding_success_rate",
    "format_matrix_market",
    "frobenius_moment_check",
    "frobenius_norm",
    "gaussian_matrix",
    "gaussians",
    "hash_independence_exhaustive",
    "invert_upper_triangular",
    "leverage_scores",
    "low_rank",
    "matmul",
    "matrix_product_error_check",
    "mix",
    "mix64",
    "nnz_scaling_benchmark",
    "qr",
    "rademacher",
    "random_orthonormal",
    "rank_k_error",
    "read_matrix_market",
    "recommend_params",
    "recommended_independence",
    "singular_values",
    "sketched_lstsq",
    "solve_least_squares",
    "spec_for_subspace",
    "svd",
    "truncate_rank_k",
    "uniform01",
    "verify",
    "with_seed",
    "write_matrix_market",
]
