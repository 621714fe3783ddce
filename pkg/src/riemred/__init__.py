"""Geometry-aware dimensionality reduction for manifold-valued data."""

from .manifolds import (
    ManifoldSpec,
    Point,
    TangentVec,
    exp_map,
    geodesic_dist,
    inner,
    log_map,
    project_tangent,
    qr_retract,
)
from .frechet import TangentDataset, frechet_mean, lift, tangent_covariance
from .riemopt import RgdConfig, RgdTrace, riemannian_grad, rgd_minimize
from .spectral import EigPair, gen_eig, shrink, svt, sym_eig
from .tangent_reducers import (
    OnppModel,
    PgaModel,
    RrpcaResult,
    onpp_fit,
    onpp_transform,
    onpp_weights,
    pga_fit,
    pga_reconstruct,
    pga_transform,
    rrpca_fit,
    rrpca_reduce,
)
from .graph_reducers import (
    EmbeddingResult,
    NeighborGraph,
    heat_weights,
    isomap_embed,
    knn_graph,
    laplacian_embed,
    nystrom_extend,
)
from .supervised import (
    RldaModel,
    RsvmModel,
    rlda_fit,
    rlda_transform,
    rsvm_fit,
    rsvm_predict,
)
from .datasets import (
    LabeledDataset,
    accuracy,
    generate,
    knn_classify,
    load_csv,
    stratified_split,
)
from .benchmark import BenchConfig, BenchmarkReport, run_benchmark

__version__ = "0.1.0"
