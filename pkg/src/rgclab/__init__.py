"""rgclab: sampling, geometric complexes and topological statistics for
stationary point processes on cubical windows."""

from .pointproc import (Window, ModelSpec, PointConfiguration, sample,
                        joint_intensity, estimate_void,
                        estimate_palm_functional, poisson, perturbed_lattice,
                        ginibre, gef_zeros, cox_cluster)
from .geograph import (GraphPattern, GeometricGraph, build_graph,
                       pattern_indicator, count_subgraphs, count_components,
                       connected_components, load_pattern_catalog)
from .complexes import (SimplicialComplex, Filtration, ComplexPattern,
                        build_rips, build_cech, rips_filtration,
                        cech_filtration, count_subcomplexes,
                        pattern_generators, miniball)
from .homology import (BettiVector, Barcode, betti_numbers,
                       euler_characteristic, persistence, betti_from_barcode,
                       check_sandwich)
from .morse import (circumsphere, in_open_convex_hull, critical_points,
                    morse_euler, discrete_morse_critical_simplices)
from .limits import (LimitConstant, mu0, mu_beta, gamma_beta, nu_k,
                     fit_scaling_exponent)
from .records import EstimateRecord

__version__ = "0.1.0"
