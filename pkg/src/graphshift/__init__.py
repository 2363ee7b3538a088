"""Graph-structured two-sample tests and nonhomogeneous subgraph discovery."""

from .discovery import (
    DiscoveryConfig,
    PermutationSummary,
    SubgraphHit,
    discover,
    euclidean_upper_bound,
    exact_upper_bound,
    miss_diagnostic,
    miss_threshold,
    permutation_null,
    run_discovery,
)
from .distributions import f_cdf, noncentral_f_cdf, noncentral_f_sf, power, shift_increase
from .estimators import GraphFilter, GraphT2Test, SubgraphDiscovery
from .graph import (
    DegenerateDegreeError,
    Edge,
    Graph,
    GraphError,
    StructureMatrix,
    energy,
    laplacian,
    read_graph_tsv,
    write_graph_tsv,
)
from .inference import (
    SingularCovarianceError,
    TestResult,
    TwoSampleData,
    bh_fdr,
    graph_t2,
    hotelling_t2,
    pca_t2,
    pooled_covariance,
)
from .spectral import SpectralBasis, eigenbasis, project

__version__ = "0.1.0"
