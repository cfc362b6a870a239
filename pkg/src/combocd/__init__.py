"""Community detection by pairwise recombination search (Combo), with a Louvain baseline."""

from .combo import ComboConfig, optimize
from .graph import Graph, karate_club, parse_edge_list, read_graph
from .louvain import LouvainConfig, louvain
from .objective import ObjectiveKind, codelength, modularity
from .partition import Partition, compact, nmi
from .synthgen import PlantedSpec, generate

__all__ = [
    "ComboConfig",
    "Graph",
    "LouvainConfig",
    "ObjectiveKind",
    "Partition",
    "PlantedSpec",
    "codelength",
    "compact",
    "generate",
    "karate_club",
    "louvain",
    "modularity",
    "nmi",
    "optimize",
    "parse_edge_list",
    "read_graph",
]
