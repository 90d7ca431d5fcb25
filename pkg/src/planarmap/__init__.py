"""Numerical analysis of planar harmonic and C1 maps.

Critical sets and their images, window-limited valence, cluster sets at
infinity, quasiregular-sequence certificates, and an evidence pipeline
for asymptotic values built from end cuts and path lifting.
"""

from .asymptote import (AsymptoteReport, PreconditionFindings, TraceConfig,
                        divergence_check, precondition_scan, trace_asymptote)
from .bloch import (DiagnosisReport, NormalizedMap, SchlichtReport,
                    SequenceCertificate, bloch_radius_k, cgh_radii,
                    check_conditions, diagnose_sequence, normalized_map,
                    schlicht_disk_verify)
from .cluster import (ClusterError, RefineResult, cluster_samples,
                      off_partition_refine, sequence_to_cluster)
from .critical import (Polyline, PolylineSet, Window, critical_contours,
                       image_of_critical, nearest_critical_distance)
from .expr import DomainFault, ParseError, parse, unparse
from .field import (Disk, PlanarMap, Point, WirtingerData, builtin,
                    builtin_names, conjugate_map, evaluate, evaluate_grid,
                    jacobian_grid, planar_map, wirtinger, wirtinger_grid)
from .lift import (LiftResult, lift_all, lift_path, newton_refine_batch,
                   preimage_search, preimages)
from .paths import (EndCutResult, EndCutSchedule, PathError, PolyPath,
                    RegionOracle, concat_paths, end_cut, make_simple,
                    polygonal_connect, region_from_window, tube_detour,
                    ulac_probe)
from .valence import (InfiniteValenceAssessment, OverlayReport, ValenceGrid,
                      assess_infinite_valence, partition_overlay, valence_at,
                      valence_map)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # field / expressions
    "Point", "Disk", "PlanarMap", "WirtingerData", "planar_map", "builtin",
    "builtin_names", "conjugate_map", "evaluate", "wirtinger",
    "evaluate_grid", "wirtinger_grid", "jacobian_grid", "parse", "unparse",
    "ParseError", "DomainFault",
    # critical sets
    "Window", "Polyline", "PolylineSet", "critical_contours",
    "image_of_critical", "nearest_critical_distance",
    # paths
    "PolyPath", "PathError", "RegionOracle", "region_from_window",
    "EndCutSchedule", "EndCutResult", "make_simple", "concat_paths",
    "polygonal_connect", "tube_detour", "end_cut", "ulac_probe",
    # lifting
    "LiftResult", "newton_refine_batch", "preimage_search", "preimages",
    "lift_path", "lift_all",
    # valence
    "ValenceGrid", "InfiniteValenceAssessment", "OverlayReport", "valence_at",
    "assess_infinite_valence", "valence_map", "partition_overlay",
    # cluster sets
    "ClusterError", "RefineResult", "cluster_samples", "sequence_to_cluster",
    "off_partition_refine",
    # certificates
    "SequenceCertificate", "SchlichtReport", "NormalizedMap",
    "DiagnosisReport", "check_conditions", "cgh_radii", "bloch_radius_k",
    "schlicht_disk_verify", "normalized_map", "diagnose_sequence",
    # asymptote pipeline
    "TraceConfig", "PreconditionFindings", "AsymptoteReport",
    "precondition_scan", "divergence_check", "trace_asymptote",
]
