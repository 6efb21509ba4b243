from abc import ABC, abstractmethod

class DataManagerInterface(ABC):
    """Abstract base class defining the interface for any data manager"""

    @abstractmethod
    def write_reports(self, reports, path, fmt='csv'):
        """Write experiment reports to a file"""
        pass

    @abstractmethod
    def export_qubo(self, qubo, path):
        """Write a QUBO instance in text form"""
        pass

    @abstractmethod
    def load_qubo(self, path):
        """Read a QUBO instance written by export_qubo"""
        pass

    @abstractmethod
    def write_gap_profile(self, profile, path):
        """Write a gap profile as a table of s, lambda0, lambda1"""
        pass

    @abstractmethod
    def save_aa_params(self, params, path, metadata=None):
        """Save adiabatic ansatz parameters"""
        pass

    @abstractmethod
    def load_aa_params(self, path):
        """Load adiabatic ansatz parameters"""
        pass
