from .structure import Graph, laplacian, load_adjacency, save_adjacency
from .spectral import (
    SpectralDecomposition,
    graph_fourier,
    inverse_graph_fourier,
    jacobi_eigh,
    lambda_max,
    scaled_laplacian,
    spectral_decompose,
)
from .chebyshev import ChebFilter, cheb_conv, scaled_laplacian_for

__all__ = [
    "Graph", "laplacian", "load_adjacency", "save_adjacency",
    "SpectralDecomposition", "graph_fourier", "inverse_graph_fourier",
    "jacobi_eigh", "lambda_max", "scaled_laplacian", "spectral_decompose",
    "ChebFilter", "cheb_conv", "scaled_laplacian_for",
]
