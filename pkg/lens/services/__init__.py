"""
Services Package
Verifiers, probes, the automaton bridge, reports and the run ledger.
"""

from lens.services.invariance_service import DeviationReport, InvarianceError, InvarianceService
from lens.services.probe_service import (
    CollisionReport,
    PositionalReport,
    ProbeError,
    ProbeService,
    ProbeTable,
)
from lens.services.bridge_service import (
    BridgeError,
    BridgeSpec,
    ComparisonReport,
    LabeledModel,
    build_reset_shortcut_model,
    compare_model_to_fsa,
    minimum_beta,
)
from lens.services.report_service import RunManifest, write_csv
from lens.services.run_service import RunService

__all__ = [
    'DeviationReport',
    'InvarianceError',
    'InvarianceService',
    'CollisionReport',
    'PositionalReport',
    'ProbeError',
    'ProbeService',
    'ProbeTable',
    'BridgeError',
    'BridgeSpec',
    'ComparisonReport',
    'LabeledModel',
    'build_reset_shortcut_model',
    'compare_model_to_fsa',
    'minimum_beta',
    'RunManifest',
    'write_csv',
    'RunService',
]
