'''
This module contains utility functions shared by the analysis, PDE, simulation
and command-line layers: message logging, JSON loading, unbounded-number tokens
and plain-text exports.
'''
import io
import json
import math
from pathlib import Path

import numpy as np

from .errors import ValidationError

# string sentinels used by the JSON encodings for unbounded endpoints
INFINITY_TOKENS = {"inf": math.inf, "+inf": math.inf, "-inf": -math.inf}


def log_and_print(message: str, logger=None, verbose: bool = False):
    """
    Logs and prints a message.

    Parameters
    ----------
    message : str
        The message to log and print.
    logger : logging.Logger, optional
        The logger to log the message to. If None, the message is not logged. The default is None.
    verbose : bool, optional
        Whether to print the message. The default is False.
    """

    # Log the message
    if logger is not None:
        logger.info(message)

    # Print the message
    if verbose:
        print(message)


def parse_real(token) -> float:
    """Converts a JSON number or an infinity sentinel into a float.

    Parameters
    ----------
    token : int, float or str
        A number, or one of "inf", "+inf", "-inf".

    Returns
    -------
    float
        The parsed value.

    Raises
    ------
    ValidationError
        If the token is neither a number nor a known sentinel, or is NaN.

    Examples
    --------
    >>> parse_real("-inf")
    -inf
    >>> parse_real(2)
    2.0
    """
    if isinstance(token, str):
        key = token.strip().lower()
        if key in INFINITY_TOKENS:
            return INFINITY_TOKENS[key]
        message = f"Unknown numeric token '{token}' (expected a number, 'inf' or '-inf')"
        raise ValidationError(message)

    if isinstance(token, bool) or not isinstance(token, (int, float)):
        raise ValidationError(f"Expected a number, got {token!r}")

    value = float(token)
    if math.isnan(value):
        raise ValidationError("NaN is not a valid endpoint")
    return value


def format_real(value: float):
    """Inverse of `parse_real`: infinities become string sentinels."""
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return float(value)


def load_json(json_file: str | Path):
    """
    Loads a JSON document from disk.

    Parameters
    ----------
    json_file : str | Path
        Path to the JSON file.

    Returns
    -------
    dict or list
        The decoded document.
    """
    message = f"File {json_file} does not exist."
    if not Path(json_file).exists():
        raise ValidationError(message)

    with open(json_file, encoding='utf-8') as f:
        return json.load(f)


def write_json(document, out_file: str | Path | None = None) -> str:
    """Serializes a document; writes it to `out_file` when given and returns the text."""
    text = json.dumps(jsonable(document), indent=2)
    if out_file is not None:
        with open(out_file, 'w', encoding="utf-8") as f:
            f.write(text)
            f.write("\n")
    return text


def write_csv(columns: dict, out_file: str | Path | None = None) -> str:
    """
    Writes equally long numeric columns as CSV.

    Parameters
    ----------
    columns : dict
        Column name -> 1-d array-like. All columns must share the same length.
    out_file : str | Path, optional
        Destination file. When None only the text is returned.

    Returns
    -------
    str
        The CSV text (header line included).
    """
    names = list(columns)
    table = np.column_stack([np.asarray(columns[name], dtype=float) for name in names])

    buffer = io.StringIO()
    np.savetxt(buffer, table, delimiter=",", header=",".join(names), comments="", fmt="%.17g")
    text = buffer.getvalue()

    if out_file is not None:
        with open(out_file, 'w', encoding="utf-8") as f:
            f.write(text)
    return text


def jsonable(obj):
    """Recursively converts numpy values and infinities into plain JSON types."""
    if isinstance(obj, dict):
        return {str(key): jsonable(value) for key, value in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(value) for value in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        if math.isnan(value):
            return None
        return format_real(value)
    return obj
