from src.services.export_service import ExportService
from src.services.reconstruction_service import ReconstructionService, evaluate_profile
from src.services.solver_service import BoundaryRoot, SolverService

__all__ = [
    "BoundaryRoot",
    "ExportService",
    "ReconstructionService",
    "SolverService",
    "evaluate_profile",
]
