"""OpenDRIVE to Catmull-Rom spline road conversion, scoring, validation and re-simulation."""

from .converter import (
    BoundaryPoint,
    ControlPoint,
    ConversionConfig,
    SplineResult,
    catmull_rom_spline,
    compute_centerline,
    extract_road_geometry,
    generate_spline,
)
from .fidelity import FidelityReport, accuracy, r_squared, score, score_result
from .geometry import (
    Pose,
    elevation_at,
    eval_reference_line,
    lane_offset_at,
    lateral_offset_point,
    road_width_at,
)
from .ingest import RoadNetwork, load_scenario, parse_xodr
from .resim import SimOutcome, VehicleConfig, simulate
from .validate import ValidityReport, check_validity, self_intersects

__version__ = "0.1.0"
