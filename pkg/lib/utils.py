#!/usr/bin/env python3
"""
Utility functions for simulator scripts
"""

import json
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Union

import numpy as np


def json_default(value: Any) -> Any:
    # numpy scalars and arrays show up in metrics and reports
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def save_to_json(data: Any, filename: Union[str, Path], pretty: bool = True) -> Path:
    """
    Save data to JSON file

    Args:
        data: Data to save (dict, list, etc.)
        filename: Output filename
        pretty: Pretty-print JSON with indentation

    Returns:
        Path written
    """
    path = Path(filename)
    ensure_directory(path.parent)
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(data, f, indent=2 if pretty else None, ensure_ascii=False, default=json_default)
        f.write("\n")
    return path


def save_to_jsonl(records: Iterable[Mapping[str, Any]], filename: Union[str, Path],
                  footer: Optional[Mapping[str, Any]] = None) -> Path:
    """
    Write one JSON object per line, optionally followed by a footer line
    of the form {"report": {...}}.
    """
    path = Path(filename)
    ensure_directory(path.parent)
    with open(path, 'w', encoding='utf-8') as f:
        for record in records:
            f.write(json.dumps(record, default=json_default) + "\n")
        if footer is not None:
            f.write(json.dumps({"report": footer}, default=json_default) + "\n")
    return path


def print_table(data: List[Dict], headers: Optional[List[str]] = None, max_width: int = 100) -> None:
    """
    Print data as formatted table

    Args:
        data: List of dictionaries
        headers: Column headers. If None, uses keys from first item
        max_width: Maximum column width
    """
    if not data:
        print("No data to display")
        return

    if headers is None:
        headers = list(data[0].keys())

    def cell(value: Any) -> str:
        if isinstance(value, float):
            return f"{value:.6g}"
        return str(value)

    widths = {}
    for header in headers:
        widths[header] = min(max(len(header), max(len(cell(row.get(header, ''))) for row in data)), max_width)

    header_line = " | ".join(header.ljust(widths[header]) for header in headers)
    print(header_line)
    print("-" * len(header_line))

    for row in data:
        print(" | ".join(cell(row.get(header, ''))[:widths[header]].ljust(widths[header]) for header in headers))


def format_bytes(bytes_size: float) -> str:
    """
    Format bytes to human-readable size

    Args:
        bytes_size: Size in bytes

    Returns:
        Formatted string (e.g., "1.5 MB")
    """
    for unit in ['B', 'KB', 'MB', 'GB', 'TB']:
        if bytes_size < 1024.0:
            return f"{bytes_size:.1f} {unit}"
        bytes_size /= 1024.0
    return f"{bytes_size:.1f} PB"


def format_duration(seconds: float) -> str:
    """Format seconds as e.g. '850 ms', '12.3 s' or '4 min 05 s'."""
    if seconds < 1.0:
        return f"{seconds * 1000:.0f} ms"
    if seconds < 60.0:
        return f"{seconds:.1f} s"
    minutes, rest = divmod(int(round(seconds)), 60)
    return f"{minutes} min {rest:02d} s"


def ensure_directory(path: Union[str, Path]) -> None:
    """
    Ensure a directory exists, create if it doesn't

    Args:
        path: Directory path
    """
    Path(path).mkdir(parents=True, exist_ok=True)


def load_config(config_path: Optional[Union[str, Path]] = None) -> Dict[str, Any]:
    """
    Load configuration from JSON file

    Args:
        config_path: Path to config.json file. If None, uses default location.

    Returns:
        Configuration dictionary

    Raises:
        FileNotFoundError: If config file doesn't exist
        json.JSONDecodeError: If config file is invalid JSON
    """
    if config_path is None:
        # Default to config/config.json relative to project root
        config_path = Path(__file__).parent.parent / "config" / "config.json"
    else:
        config_path = Path(config_path)

    if not config_path.exists():
        raise FileNotFoundError(
            f"Configuration file not found: {config_path}\n"
            f"Copy config/config.example.json to config/config.json to change the defaults"
        )

    with open(config_path, 'r', encoding='utf-8') as f:
        config = json.load(f)

    if not isinstance(config, dict):
        raise ValueError(f"Configuration file {config_path} must hold a JSON object")
    return config
