"""
Number formatting helpers for reports and exported files.
"""


def format_cell(value):
    """
    Format a report value for CSV.

    Floats use the shortest representation that round-trips, booleans are
    lower-case and missing values become empty cells.

    :param value: Report value
    :return: String cell
    """
    if value is None:
        return ''
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, float):
        return repr(value)
    return str(value)


def format_exact(value):
    """
    Format a float with 17 significant digits (bit-exact round trip).

    :param value: Float value
    :return: String
    """
    return f"{float(value):.17g}"


def format_metric(value, digits=6):
    """
    Format a metric for console output.

    :param value: Number or None
    :param digits: Significant digits
    :return: String, '-' for missing values
    """
    if value is None:
        return '-'
    if isinstance(value, float):
        return f"{value:.{digits}g}"
    return str(value)
