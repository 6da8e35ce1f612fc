"""
Input validation for simulator commands and file loaders.

All helpers raise ValidationError, which the script base maps to the
configuration-error exit code.
"""

import re
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple, Union


class ValidationError(ValueError):
    """Raised when input validation fails."""

    pass


def validate_file_path(
    path: Union[str, Path],
    must_exist: bool = False,
    must_be_file: bool = True,
    suffixes: Optional[Sequence[str]] = None,
) -> Path:
    """
    Validate an input or output file path.

    Args:
        path: File path
        must_exist: Path must exist
        must_be_file: Existing path must be a regular file
        suffixes: Allowed extensions (e.g. [".json"]); None accepts any

    Returns:
        Resolved Path object

    Raises:
        ValidationError: If validation fails

    Example:
        >>> validate_file_path('graph.json', suffixes=['.json'])
        PosixPath('/current/dir/graph.json')
    """
    if not path:
        raise ValidationError("Path cannot be empty")

    try:
        resolved = Path(path).expanduser().resolve()
    except (OSError, RuntimeError) as e:
        raise ValidationError(f"Invalid path: {e}")

    if must_exist and not resolved.exists():
        raise ValidationError(f"Path does not exist: {path}")

    if must_be_file and resolved.exists() and not resolved.is_file():
        raise ValidationError(f"Path is not a file: {path}")

    if suffixes is not None and resolved.suffix.lower() not in [s.lower() for s in suffixes]:
        raise ValidationError(f"Expected a {'/'.join(suffixes)} file: {path}")

    return resolved


def validate_positive_int(value: Union[int, str], name: str = "value") -> int:
    """
    Validate positive integer value.

    Example:
        >>> validate_positive_int('16', 'chi')
        16
        >>> validate_positive_int(0, 'chi')
        ValidationError: chi must be positive
    """
    if isinstance(value, bool):
        raise ValidationError(f"{name} must be an integer")
    try:
        int_value = int(value)
    except (ValueError, TypeError):
        raise ValidationError(f"{name} must be an integer")

    if isinstance(value, float) and value != int_value:
        raise ValidationError(f"{name} must be an integer")

    if int_value <= 0:
        raise ValidationError(f"{name} must be positive")

    return int_value


def validate_range(
    value: Union[int, float],
    min_val: Optional[float] = None,
    max_val: Optional[float] = None,
    name: str = "value",
) -> Union[int, float]:
    """
    Validate value is within an inclusive range.

    Example:
        >>> validate_range(1e-10, min_val=0, name='bp_tol')
        1e-10
    """
    if min_val is not None and value < min_val:
        raise ValidationError(f"{name} must be >= {min_val}")

    if max_val is not None and value > max_val:
        raise ValidationError(f"{name} must be <= {max_val}")

    return value


def parse_dimensions(text: str, name: str = "dimensions") -> Tuple[int, int]:
    """
    Parse "RxC" (or "R,C") into two positive integers.

    Example:
        >>> parse_dimensions('2x3', 'cells')
        (2, 3)
    """
    match = re.fullmatch(r"\s*(\d+)\s*[xX,]\s*(\d+)\s*", str(text))
    if not match:
        raise ValidationError(f"{name} must look like ROWSxCOLS, got {text!r}")
    return validate_positive_int(match.group(1), name), validate_positive_int(match.group(2), name)


def validate_ranks(values: Iterable[Union[int, str]], name: str = "rank") -> List[int]:
    """Validate a non-empty list of positive ranks, keeping the given order."""
    ranks = [validate_positive_int(v, name) for v in values]
    if not ranks:
        raise ValidationError(f"At least one {name} is required")
    return ranks
