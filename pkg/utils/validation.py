"""
Input checks shared by the services.
"""


def as_integer(value):
    """
    Integral value of an int-like input.

    :param value: Candidate such as 4, 4.0 or numpy.int64(4)
    :return: int, or None for booleans, strings, non-integral or non-numeric input
    """
    if isinstance(value, (bool, str, bytes)):
        return None
    try:
        integer = int(value)
        return integer if integer == value else None
    except (TypeError, ValueError, OverflowError):
        return None
