import logging
import os
from typing import Iterable, List

log = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
SIGNIFICANT_DIGITS = 17


def create_directory_if_not_exists(directory: str) -> None:
    if directory != "":
        # If the directory name is not empty
        if not os.path.exists(directory):
            os.makedirs(directory, exist_ok=True)
            log.info(f"Directory '{directory}' did not exist and was created.")


def format_number(value: float) -> str:
    """Formats a float with enough digits to round-trip exactly through text.

    Args:
        value (float): The number to format.

    Returns:
        (str): The 17-significant-digit representation ('nan'/'inf' for non-finite values).
    """
    return f"{float(value):.{SIGNIFICANT_DIGITS}g}"


def format_row(values: Iterable) -> List[str]:
    """Formats a CSV row; floats get round-trip precision, everything else goes through str."""
    row = []
    for value in values:
        if value is None:
            row.append("")
        elif isinstance(value, (bool, int, str)):
            row.append(str(value))
        else:
            try:
                row.append(format_number(value))
            except (TypeError, ValueError):
                row.append(str(value))
    return row


def configure_logging(verbosity: int = 0) -> None:
    """Installs a single stream handler on the root logger.

    Args:
        verbosity (int): -1 for warnings only, 0 for info, 1 or more for debug output.
    """
    if verbosity >= 1:
        level = logging.DEBUG
    elif verbosity <= -1:
        level = logging.WARNING
    else:
        level = logging.INFO
    logging.basicConfig(level=level, format=LOG_FORMAT, force=True)
