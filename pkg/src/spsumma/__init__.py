"""Sparse matrix-matrix multiplication over semirings, hypersparse local
kernels, Sparse SUMMA on a simulated processor grid, and submatrix
indexing/assignment expressed as sparse products."""

from .errors import (
    BoundsError, ConfigurationError, DeadlockError, DimensionError, ModelError,
    ParseError, SparseError,
)
from .formats import (
    CscMatrix, DcscMatrix, TripleList, as_csc, as_dcsc, column_range, csc_from_coo,
    csc_to_dcsc, dcsc_from_coo, dcsc_to_csc, from_dense, from_triples, identity, transpose,
)
from .generators import (
    RmatParams, erdos_renyi, random_symmetric_permutation, restriction_operator, rmat,
    split_diagonal,
)
from .grid import (
    CommStats, DistMatrix, DistVector, GridConfig, alltoall, distribute, gather, run_spmd,
    scatter_from_diagonal, transpose_exchange,
)
from .indexing import (
    build_col_extractor, build_row_extractor, dist_extend_add, dist_spasgn, dist_spref,
    extend_add, spasgn, spasgn_op_counters, spref,
)
from .kernels import (
    columnwise_spgemm, count_flops, ewise_mult, hypersparse_gemm, scale_columns, sparse_add,
)
from .mmio import read_matrix_market, write_matrix_market
from .semiring import BOOL_OR_AND, INT_PLUS_TIMES, MIN_PLUS, PLUS_TIMES, Semiring, get_semiring
from .summa import SummaPlan, predict_costs, sparse_summa

__version__ = "0.1.0"
