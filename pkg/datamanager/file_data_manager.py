import csv
import io
import json
from pathlib import Path

import numpy as np

from exceptions import ValidationError, ReportWriteError
from utils.formatting import format_cell, format_exact
from .data_manager_interface import DataManagerInterface
from .data_models import ExperimentReport, QuboProblem

REPORT_FORMATS = ('csv', 'json')


class FileDataManager(DataManagerInterface):
    """Flat-file implementation of the DataManagerInterface (CSV, JSON and QUBO text)"""

    def __init__(self):
        pass

    # ==================== REPORTS ====================

    def render_reports(self, reports, fmt='csv'):
        """
        Render reports as text.

        :param reports: List of ExperimentReport
        :param fmt: 'csv' or 'json'
        :return: File content
        """
        if fmt not in REPORT_FORMATS:
            raise ValidationError('format', f"Unknown report format '{fmt}' (expected csv or json)")

        if fmt == 'json':
            rows = [report.to_dict() for report in reports]
            return json.dumps(rows, indent=2) + '\n'

        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator='\n')
        columns = ExperimentReport.columns()
        writer.writerow(columns)
        for report in reports:
            row = report.to_dict()
            writer.writerow([format_cell(row[column]) for column in columns])
        return buffer.getvalue()

    def write_reports(self, reports, path, fmt='csv'):
        """
        Write reports to a file. Timing is left out so reruns are byte-identical.

        :param reports: List of ExperimentReport
        :param path: Output path
        :param fmt: 'csv' or 'json'
        :return: Path written
        """
        return self._write_text(path, self.render_reports(reports, fmt))

    # ==================== QUBO TEXT FORMAT ====================

    def render_qubo(self, qubo):
        """
        Render a QUBO as 'QUBO r C0' followed by 'i j value' lines for i <= j.

        Diagonal lines hold Q_ii + L_i; off-diagonal lines hold the upper
        triangular coupling 2 Q_ij.

        :param qubo: QuboProblem
        :return: File content
        """
        compact = np.array(qubo.Q) + np.diag(qubo.L)
        lines = [f"QUBO {qubo.r} {format_exact(qubo.C0)}"]
        for i in range(qubo.r):
            for j in range(i, qubo.r):
                value = compact[i, j] if i == j else 2.0 * compact[i, j]
                if value != 0.0:
                    lines.append(f"{i} {j} {format_exact(value)}")
        return '\n'.join(lines) + '\n'

    def export_qubo(self, qubo, path):
        """
        Write a QUBO instance in text form.

        :param qubo: QuboProblem
        :param path: Output path
        :return: Path written
        """
        return self._write_text(path, self.render_qubo(qubo))

    def parse_qubo(self, text):
        """
        Parse the QUBO text form.

        :param text: File content
        :return: QuboProblem with zero-diagonal Q and the diagonal in L
        """
        lines = [line.split() for line in text.splitlines() if line.strip()]
        if not lines or len(lines[0]) != 3 or lines[0][0] != 'QUBO':
            raise ValidationError('qubo', "First line must be 'QUBO <r> <C0>'")
        try:
            r = int(lines[0][1])
            constant = float(lines[0][2])
        except ValueError:
            raise ValidationError('qubo', "Header values are not numeric")

        Q = np.zeros((r, r))
        L = np.zeros(r)
        for number, parts in enumerate(lines[1:], start=2):
            if len(parts) != 3:
                raise ValidationError('qubo', f"Line {number} must look like 'i j value'")
            try:
                i, j, value = int(parts[0]), int(parts[1]), float(parts[2])
            except ValueError:
                raise ValidationError('qubo', f"Line {number} is not numeric")
            if not 0 <= i <= j < r:
                raise ValidationError('qubo', f"Line {number} has indices outside 0 <= i <= j < {r}")
            if i == j:
                L[i] = value
            else:
                Q[i, j] = Q[j, i] = value / 2.0
        return QuboProblem(Q=Q, L=L, C0=constant)

    def load_qubo(self, path):
        """
        Read a QUBO instance written by export_qubo.

        :param path: Input path
        :return: QuboProblem
        """
        return self.parse_qubo(self._read_text(path))

    # ==================== GAP PROFILES ====================

    def write_gap_profile(self, profile, path):
        """
        Write the scanned eigenvalues as 's,lambda0,lambda1' rows.

        :param profile: GapProfile
        :param path: Output path
        :return: Path written
        """
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator='\n')
        writer.writerow(['s', 'lambda0', 'lambda1'])
        for s, low, high in zip(profile.s_values, profile.lambda0, profile.lambda1):
            writer.writerow([repr(float(s)), repr(float(low)), repr(float(high))])
        return self._write_text(path, buffer.getvalue())

    # ==================== ADIABATIC ANSATZ PARAMETERS ====================

    def save_aa_params(self, params, path, metadata=None):
        """
        Save adiabatic ansatz parameters as JSON.

        :param params: Real parameter vector
        :param path: Output path
        :param metadata: Extra fields such as N, row_norm and g_min
        :return: Path written
        """
        document = dict(metadata or {})
        document['params'] = [float(value) for value in np.asarray(params, dtype=float).ravel()]
        return self._write_text(path, json.dumps(document, indent=2) + '\n')

    def load_aa_params(self, path):
        """
        Load adiabatic ansatz parameters.

        :param path: JSON file written by save_aa_params, or a bare list of numbers
        :return: Dictionary with 'params' (tuple) and 'row_norm'
        """
        try:
            document = json.loads(self._read_text(path))
        except json.JSONDecodeError as e:
            raise ValidationError('aa_params', f"{path} is not valid JSON: {e.msg}")
        if isinstance(document, list):
            document = {'params': document}
        if not isinstance(document, dict) or not isinstance(document.get('params'), list):
            raise ValidationError('aa_params', f"{path} has no 'params' list")
        try:
            params = tuple(float(value) for value in document['params'])
            row_norm = float(document.get('row_norm', 1.0))
        except (TypeError, ValueError):
            raise ValidationError('aa_params', f"{path} contains non-numeric values")
        return {**document, 'params': params, 'row_norm': row_norm}

    # ==================== HELPERS ====================

    def _write_text(self, path, content):
        """
        Write text to path, creating parent directories.

        :param path: Output path
        :param content: Text content
        :return: Path written
        """
        path = Path(path)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(content, encoding='utf-8')
        except OSError as e:
            raise ReportWriteError(str(path), e)
        return path

    def _read_text(self, path):
        """
        Read a text file.

        :param path: Input path
        :return: File content
        """
        try:
            return Path(path).read_text(encoding='utf-8')
        except OSError as e:
            raise ValidationError('path', f"Cannot read {path}: {e.strerror or e}")
