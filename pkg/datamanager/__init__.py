from .data_models import (
    AnsatzKind, AnnealSchedule, BinarizedSystem, BruteForceResult,
    ClosedFormSolution, CollocationGrid, ExperimentReport, FourierBasisSet,
    GapProfile, HelmholtzProblem, IsingProblem, LinearSystem, QuboProblem,
    Sample, SampleSet, ScenarioConfig, TrigPolynomial
)
from .data_manager_interface import DataManagerInterface
from .file_data_manager import FileDataManager

__all__ = ['AnsatzKind', 'AnnealSchedule', 'BinarizedSystem', 'BruteForceResult',
           'ClosedFormSolution', 'CollocationGrid', 'ExperimentReport',
           'FourierBasisSet', 'GapProfile', 'HelmholtzProblem', 'IsingProblem',
           'LinearSystem', 'QuboProblem', 'Sample', 'SampleSet', 'ScenarioConfig',
           'TrigPolynomial', 'DataManagerInterface', 'FileDataManager']
